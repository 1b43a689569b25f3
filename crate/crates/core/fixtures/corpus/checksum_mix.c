// Mix two words into a checksum.
int checksum_mix(int first, int second) {
    int mixed = first * 31 + second;
    mixed = mixed ^ (first >> 3);
    return mixed - second * 7;
}
