#include "mathutil.h"

static unsigned int ring_steps = 0;

void accum_add(struct accum *acc, int value)
{
    acc->total += value;
    acc->count += 1;
}

long long accum_mean(struct accum *acc)
{
    if (acc->count == 0) {
        return 0;
    }
    return acc->total / acc->count;
}

unsigned int ring_next(unsigned int cur, unsigned int size)
{
    unsigned int g = gcd_pair(cur + 1, size);
    ring_steps += 1;
    return (cur + g) % size;
}

unsigned int ring_scan(unsigned int start, unsigned int size)
{
    unsigned int cur = start;
    unsigned int i;
    for (i = 0; i < MAX_ITER; i++) {
        if (i >= step_budget) {
            break;
        }
        cur = ring_next(cur, size);
        if (is_even(cur)) {
            cur = cur + 1;
        }
    }
    return cur;
}
