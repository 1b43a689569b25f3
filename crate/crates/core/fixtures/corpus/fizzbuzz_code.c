// FizzBuzz as a code: 3 = both, 1 = fizz, 2 = buzz, 0 = neither.
int fizzbuzz_code(int number) {
    if (number % 15 == 0) {
        return 3;
    } else if (number % 3 == 0) {
        return 1;
    } else if (number % 5 == 0) {
        return 2;
    }
    return 0;
}
