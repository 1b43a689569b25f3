int h(int a) {
    return a + 1;
}
