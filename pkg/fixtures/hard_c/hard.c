int base_val(int v)
{
    if (v > 100) {
        return 100;
    }
    return v;
}

int mix_pair(int a, int b)
{
    int left = base_val(a);
    int right = base_val(b);
    return left * 2 + right;
}

unsigned int spin_sum(unsigned int n)
{
    unsigned int acc = 0;
    unsigned int i;
    for (i = 0; i < n; i++) {
        acc = acc + i * i;
        if (acc > 10000) {
            acc = acc % 97;
        }
    }
    return acc;
}
