// Map a 0..100 score to a grade code: 4 = A, 3 = B, 2 = C, 1 = D, 0 = F.
int grade_letter(int score) {
    if (score < 0) {
        score = 0;
    }
    if (score > 100) {
        score = 100;
    }
    switch (score / 10) {
        case 10:
        case 9:
            return 4;
        case 8:
            return 3;
        case 7:
            return 2;
        case 6:
            return 1;
        default:
            return 0;
    }
}
