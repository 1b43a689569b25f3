// Gregorian leap-year rule.
// Divisible by 4, except centuries, unless divisible by 400.
int leap_year(int year) {
    if ((year % 4 == 0 && year % 100 != 0) || year % 400 == 0) {
        return 1;
    }
    return 0;
}
