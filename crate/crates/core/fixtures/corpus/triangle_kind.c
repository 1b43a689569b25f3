// Classify a triangle by its side lengths.
// 0 = invalid, 1 = equilateral, 2 = isosceles, 3 = scalene.
int triangle_kind(int side_a, int side_b, int side_c) {
    if (side_a <= 0 || side_b <= 0 || side_c <= 0) {
        return 0;
    }
    if (side_a + side_b <= side_c || side_a + side_c <= side_b || side_b + side_c <= side_a) {
        return 0;
    }
    if (side_a == side_b && side_b == side_c) {
        return 1;
    }
    if (side_a == side_b || side_b == side_c || side_a == side_c) {
        return 2;
    }
    return 3;
}
