int k(int z) {
    if (z > 0) return 1;
    else return -1;
}
