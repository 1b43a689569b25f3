// Count the set bits in the low byte of a value.
int parity_bits(int value) {
    int ones = 0;
    for (int i = 0; i < 8; i++) {
        // Test one bit per iteration.
        if ((value >> i) & 1) {
            ones = ones + 1;
        }
    }
    return ones;
}
