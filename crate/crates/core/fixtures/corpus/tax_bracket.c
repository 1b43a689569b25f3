// Progressive tax owed on an income, in whole units.
int tax_bracket(int income) {
    int owed = 0;
    if (income <= 0) {
        return 0;
    }
    // Brackets: 10% up to 100, 20% up to 500, 30% above.
    if (income <= 100) {
        owed = income / 10;
    } else if (income <= 500) {
        owed = 10 + (income - 100) * 2 / 10;
    } else {
        owed = 90 + (income - 500) * 3 / 10;
    }
    return owed;
}
