#include "mathutil.h"

unsigned int step_budget = 1024;

int clamp_nonneg(int v)
{
    if (v < 0) {
        return 0;
    }
    return v;
}

int scale_up(int v)
{
    return clamp_nonneg(v) << SCALE_SHIFT;
}

unsigned int gcd_pair(unsigned int a, unsigned int b)
{
    while (b != 0) {
        unsigned int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

int is_even(unsigned int n)
{
    if (n == 0) {
        return 1;
    }
    return is_odd(n - 1);
}

int is_odd(unsigned int n)
{
    if (n == 0) {
        return 0;
    }
    return is_even(n - 1);
}

int checked_div(int num, int den)
{
    if (den == 0) {
        return clamp_nonneg(num);
    }
    return num / den;
}

long long weighted_mix(int a, int b)
{
    long long left = scale_up(a);
    long long right = checked_div(b, 3);
    return left + right;
}
