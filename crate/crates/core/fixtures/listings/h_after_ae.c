int h(int a) {
    return (a * 4 + 4) / 4; 
        // equivalent to a + 1
}
