int g(int y) {
    if (((y*y - y*y) + 1) > 0) 
        { // always true
        if (y % 2 == 0)
            return y / 2;
        else
            return 3 * y + 1;
    } else {
        return 0; 
            // unreachable
    }
}
