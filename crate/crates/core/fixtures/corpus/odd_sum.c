// Sum of odd numbers below a limit capped at 15.
int odd_sum(int limit) {
    int total = 0;
    if (limit > 15) {
        limit = 15;
    }
    for (int i = 0; i < limit; i++) {
        if (i % 2 == 0) {
            continue;
        }
        total += i;
    }
    return total;
}
