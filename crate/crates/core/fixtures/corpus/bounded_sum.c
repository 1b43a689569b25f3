// Sum of 1..limit, with the limit capped at 20.
int bounded_sum(int limit) {
    int total = 0;
    if (limit > 20) {
        limit = 20;
    }
    // Non-positive limits sum nothing.
    for (int i = 1; i <= limit; i++) {
        total += i;
    }
    return total;
}
