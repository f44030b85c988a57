package demo;

/** Loads records from disk. */
public class Loader {
    // simple counter
    private int count; // tracks loads

    /*
     * Multi line block
     * with a gutter.
     */
    public void load() {
        count++;
    }
}
