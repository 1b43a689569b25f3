// Scaled reciprocal of the distance from a set point.
// Traps when the level equals the set point.
int unchecked_ratio(int level) {
    int offset = level - 5;
    return 1000 / offset;
}
