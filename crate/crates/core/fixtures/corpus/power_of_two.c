// Nonzero when the input is a positive power of two.
int power_of_two(int value) {
    return value > 0 && (value & (value - 1)) == 0;
}
