#include <stdint.h>
#include <stdbool.h>
#include <string.h>

typedef char String[4];
typedef enum { A, AAAA, NS, TXT, CNAME, DNAME, SOA } RecordType;
typedef struct { RecordType record_type; String name; String rdata; } Record;

bool dname_applies(char* query, Record record);

static bool label_match(const char* q, const char* pattern) {
    if (pattern[0] == '*' && pattern[1] == '\0') {
        return q[0] != '\0';
    }
    return strcmp(q, pattern) == 0;
}

bool record_applies(char* query, Record record) {
    if (record.record_type == DNAME) {
        return dname_applies(query, record);
    }
    return label_match(query, record.name);
}
