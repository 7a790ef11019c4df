package toy;

import java.io.PrintStream;

public class Report {
    private String title = "report {draft}";

    public String render() {
        StringBuilder sb = new StringBuilder();
        for (int i = 0; i < 3; i++) {
            sb.append(line(i));
        }
        /* render(); would recurse */
        return sb.toString();
    }

    String line(int i) {
        return Util.format(Util.clamp(i, 0, 2)) + "\n";
    }

    void print(PrintStream out) {
        out.println(render());
    }
}
