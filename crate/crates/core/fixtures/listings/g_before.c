int g(int y) {
    if (y % 2 == 0) {
        return y / 2;
    } else {
        return 3 * y + 1;
    }
}
