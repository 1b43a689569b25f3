// Largest of three values.
int max_of_three(int first, int second, int third) {
    int best = first;
    if (second > best) {
        best = second;
    }
    if (third > best) {
        best = third;
    }
    return best;
}
