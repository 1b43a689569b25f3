// Iterative Fibonacci for indices 0..30.
int fibonacci_iter(int index) {
    int previous = 0;
    int current = 1;
    if (index <= 0) {
        return 0;
    }
    if (index > 30) {
        index = 30;
    }
    // Walk the recurrence forward.
    for (int i = 1; i < index; i++) {
        int next = previous + current;
        previous = current;
        current = next;
    }
    return current;
}
