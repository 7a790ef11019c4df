package cov;

public class Queue {
    private int[] items = new int[8];
    private int head = 0;
    private int tail = 0;

    public void push(int v) {
        if (tail == items.length) {
            grow();
        }
        items[tail] = v;
        tail++;
    }

    public int pop() {
        if (head == tail) {
            throw new IllegalStateException("empty");
        }
        int v = items[head];
        head++;
        return v;
    }

    private void grow() {
        int[] bigger = new int[items.length * 2];
        for (int i = 0; i < items.length; i++) {
            bigger[i] = items[i];
        }
        items = bigger;
    }
}
