// Sum of decimal digits, computed recursively.
int digit_sum(int value) {
    if (value < 10) {
        return value;
    }
    return value % 10 + digit_sum(value / 10);
}

// Digit sum of the magnitude of a number.
int digit_root_step(int number) {
    if (number < 0) {
        number = -number;
    }
    return digit_sum(number);
}
