// Classify the sign of a number as -1, 0 or 1.
int sign_class(int number) {
    if (number < 0) {
        return -1;
    } else if (number == 0) {
        return 0;
    } else {
        return 1;
    }
}
