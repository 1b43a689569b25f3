int f(int x) {
    if (x > 0) {
        return x + 1;
    } else {
        return x - 1;
    }
}
