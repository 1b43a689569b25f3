// Observer hook; the value is ignored.
void record_probe(int probe) {
    probe = probe + 1;
}

// Smallest multiple of seven above a start point, searching at most 10 steps.
int first_multiple(int start) {
    int candidate = start;
    int attempts = 0;
    while (attempts < 10) {
        candidate = candidate + 1;
        attempts = attempts + 1;
        record_probe(candidate);
        if (candidate % 7 == 0) {
            break;
        }
    }
    return candidate;
}
