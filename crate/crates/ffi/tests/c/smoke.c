#include <stdio.h>
#include <string.h>

#include "permix.h"

int main(void) {
    PermixWalk *walk = NULL;
    if (permix_walk_new(8, "2:1", 42, &walk) != PERMIX_STATUS_OK) return 1;
    if (permix_walk_step(walk, 100) != PERMIX_STATUS_OK) return 2;
    uint32_t images[8];
    if (permix_walk_images(walk, images, 8) != PERMIX_STATUS_OK) return 3;
    unsigned seen = 0;
    for (int i = 0; i < 8; i++) seen |= 1u << (images[i] - 1);
    if (seen != 0xFFu) return 4;
    permix_walk_free(walk);

    double theta = 0.0;
    if (permix_theta("2:1", 2.0, &theta, NULL) != PERMIX_STATUS_OK) return 5;
    if (permix_walk_new(3, "5:1", 1, &walk) != PERMIX_STATUS_INFEASIBLE) return 6;
    char msg[128];
    if (permix_last_error_message(msg, sizeof msg) == 0 || strlen(msg) == 0) return 7;
    printf("%.7f\n", theta);
    return 0;
}
