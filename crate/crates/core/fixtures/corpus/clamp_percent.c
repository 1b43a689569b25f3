// Clamp a value into an inclusive range.
int clamp(int value, int low, int high) {
    if (value < low) {
        return low;
    }
    if (value > high) {
        return high;
    }
    return value;
}

// Percentages live in 0..100.
int clamp_percent(int value) {
    return clamp(value, 0, 100);
}
