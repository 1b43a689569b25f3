// Ticks needed to drain a tank three units at a time, scaled by a rate.
// Deep symbolic loop: exploration hits the unroll bound.
int drain_tank(int level, int rate) {
    int ticks = 0;
    while (level > 0) {
        level = level - 3;
        ticks = ticks + 1;
    }
    return ticks * rate;
}
