// Length of the English weekday name for a day number.
int weekday_length(int day) {
    int length = 0;
    int weekday = day % 7;
    if (weekday < 0) {
        weekday = weekday + 7;
    }
    switch (weekday) {
        case 0:
        case 1:
        case 5:
            length = 6;
            break;
        case 2:
            length = 7;
            break;
        case 3:
            length = 9;
            break;
        default:
            length = 8;
    }
    return length;
}
