/* Continuation-based regular expression matcher.
 * The regex tree is always concrete; only comparisons against the subject
 * text produce path constraints. No heap allocation.
 * match_cont is the continuation entry point; match wraps it with an
 * empty continuation. */
typedef enum { OR, SEQ, STAR, RANGE } RegexOp;
typedef struct Regex Regex;
struct Regex {
    RegexOp op; int clo; int chi;
    Regex* left; Regex* right;
};
typedef struct RegexCont RegexCont;
struct RegexCont {
    Regex* regex;
    RegexCont* next;
};

static int match_cont(Regex* regex, RegexCont* cont, const char* text) {
    if (regex == NULL) { return *text == '\0'; }
    if (regex->op == OR) {
        return match_cont(regex->left, cont, text) ||
               match_cont(regex->right, cont, text);
    }
    if (regex->op == SEQ) {
        RegexCont c;
        c.next = cont; c.regex = regex->right;
        return match_cont(regex->left, &c, text);
    }
    if (regex->op == STAR) {
        Regex r; r.op = SEQ; r.left = regex->left;
        r.right = regex;
        return match_cont(cont->regex, cont->next, text) ||
               (*text != '\0' && match_cont(&r, cont, text));
    }
    if (regex->op == RANGE) {
        char c = *text++;
        return c != '\0' && c >= regex->clo &&
               c <= regex->chi &&
               match_cont(cont->regex, cont->next, text);
    }
    return 0;
}

static int match(Regex* regex, const char* text) {
    RegexCont cont;
    cont.next = NULL; cont.regex = NULL;
    return match_cont(regex, &cont, text);
}
