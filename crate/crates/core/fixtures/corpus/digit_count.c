// Number of decimal digits in the magnitude of a value.
int digit_count(int value) {
    int digits = 1;
    if (value < 0) {
        value = -value;
    }
    // Strip one digit per iteration.
    while (value >= 10) {
        value = value / 10;
        digits = digits + 1;
    }
    return digits;
}
