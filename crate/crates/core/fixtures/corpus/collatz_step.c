// One step of the Collatz iteration.
// Even values halve, odd values go to 3n + 1.
int collatz_step(int value) {
    if (value % 2 == 0) {
        return value / 2;
    } else {
        return 3 * value + 1;
    }
}
