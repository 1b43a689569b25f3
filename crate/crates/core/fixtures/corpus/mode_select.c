// Pick an operating mode from a command and a pressure reading.
int mode_select(int command, int pressure) {
    int mode = 0;
    switch (command) {
        case 1:
            mode = pressure > 50 ? 2 : 1;
            break;
        case 2:
            if (pressure < 10) {
                mode = 3;
            }
            break;
        default:
            mode = -1;
    }
    return mode;
}
