// Factorial of a small input; negatives give 0, inputs cap at 10.
int factorial_clamped(int number) {
    int result = 1;
    if (number < 0) {
        return 0;
    }
    if (number > 10) {
        number = 10;
    }
    for (int i = 2; i <= number; i++) {
        result = result * i;
    }
    return result;
}
