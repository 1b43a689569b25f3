// Absolute value of a signed input.
// INT_MIN maps to itself under two's-complement negation.
int abs_value(int number) {
    if (number < 0) {
        return -number;
    }
    return number;
}
