int f(int x) {
    int state = 0;
    while (1) {
        switch(state) {
            case 0: state = 
                (x > 0) ? 
                1 : 2; break;
            case 1: 
                return x + 1;
            case 2: 
                return x - 1;
        }
    }
}
