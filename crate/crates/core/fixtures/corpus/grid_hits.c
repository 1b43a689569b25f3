// Count cells of a 3x3 multiplication grid equal to a target.
int grid_hits(int target) {
    int hits = 0;
    for (int i = 0; i < 3; i++) {
        for (int j = 0; j < 3; j++) {
            if (i * j == target) {
                hits = hits + 1;
            }
        }
    }
    return hits;
}
