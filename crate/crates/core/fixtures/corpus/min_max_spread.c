// Helpers for ordering two values.
int larger(int left, int right) {
    return left > right ? left : right;
}

int smaller(int left, int right) {
    return left < right ? left : right;
}

// Distance between two values.
int min_max_spread(int first, int second) {
    return larger(first, second) - smaller(first, second);
}
