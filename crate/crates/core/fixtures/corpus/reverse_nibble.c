// Reverse the order of the four low bits.
int reverse_nibble(int value) {
    int bit_zero = value & 1;
    int bit_one = (value >> 1) & 1;
    int bit_two = (value >> 2) & 1;
    int bit_three = (value >> 3) & 1;
    return (bit_zero << 3) | (bit_one << 2) | (bit_two << 1) | bit_three;
}
