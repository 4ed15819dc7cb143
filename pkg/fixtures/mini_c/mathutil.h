#ifndef MATHUTIL_H
#define MATHUTIL_H

#define SCALE_SHIFT 4
#define MAX_ITER 32

struct accum {
    long long total;
    unsigned int count;
};

typedef unsigned int uint_t;

extern unsigned int step_budget;

int clamp_nonneg(int v);
int scale_up(int v);
unsigned int gcd_pair(unsigned int a, unsigned int b);
int is_even(unsigned int n);
int is_odd(unsigned int n);
int checked_div(int num, int den);

#endif
