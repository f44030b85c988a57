public class Docs {
    /**/
    int a;
    /***/
    int b;
    /** Real doc. */
    int c;
    /* plain */
    int d;
}
