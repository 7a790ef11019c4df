package toy;

public class Mat {
    public int square(int a) {
        return multiply(a, a);
    }

    public int fact(int n) {
        if (n <= 1) {
            return 1;
        }
        return multiply(n, fact(n - 1));
    }

    public int multiply(int a, int b) {
        return a * b;
    }
}
