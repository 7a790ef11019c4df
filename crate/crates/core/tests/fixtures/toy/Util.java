package toy;

public class Util {
    static double pi() {
        return 3.14159;
    }

    static int clamp(int v, int lo, int hi) {
        if (v < lo) {
            return lo;
        }
        while (v > hi) {
            v = decrement(v);
        }
        return v;
    }

    static int decrement(int v) {
        return v - 1;
    }

    static String describe(int v) {
        String s = "clamp(" + v + ")";
        return s + format(v);
    }

    static String format(int v) {
        return String.valueOf(v);
    }
}
