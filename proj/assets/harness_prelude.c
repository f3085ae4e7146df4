/* Harness helpers. */
static void ps_assume_bool(const void* value) {
    klee_assume(*(const unsigned char*)value <= 1);
}

/* Last byte is the terminator; earlier bytes are printable ASCII or NUL and
 * every byte after the first NUL is NUL. */
static void ps_assume_text(const char* buf, unsigned cap, int printable) {
    unsigned i;
    klee_assume(buf[cap - 1] == '\0');
    for (i = 0; i + 1 < cap; i++) {
        if (printable) {
            klee_assume((buf[i] == '\0') | ((buf[i] >= 0x20) & (buf[i] <= 0x7E)));
        }
        if (i > 0) {
            klee_assume((buf[i - 1] != '\0') | (buf[i] == '\0'));
        }
    }
}

static void ps_capture_text(const char* value, const char* sym, unsigned cap) {
    unsigned i = 0;
    if (value != NULL) {
        for (; i + 1 < cap && value[i] != '\0'; i++) {
            klee_assume(sym[i] == value[i]);
        }
    }
    for (; i < cap; i++) {
        klee_assume(sym[i] == '\0');
    }
}
