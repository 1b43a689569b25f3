// Integer division that returns 0 instead of trapping.
int safe_divide(int dividend, int divisor) {
    if (divisor == 0) {
        return 0;
    }
    return dividend / divisor;
}
