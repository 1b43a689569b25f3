int k(int z) {
    int cond = (z >> 31) & 1; 
            // encodes sign
    if (cond == 0) return 1;
    else return -1;
}
