// Band a temperature reading: 0 cold, 1 mild, 2 warm, 3 hot.
int temperature_band(int celsius) {
    int band = celsius < 5 ? 0 : celsius < 18 ? 1 : celsius < 28 ? 2 : 3;
    return band;
}
