#pragma once

namespace cpsi {

// k: number of change-points, l: half-window length, w: common-change
// tolerance around each location.
struct Hyperparameters {
  int k = 1;
  int l = 1;
  int w = 0;
};

// Throws InputError for k < 1, l < 1, w < 0 or w >= l, and InfeasibleError
// when n < l * (k + 1).
void validate(const Hyperparameters& hp, int locations);

}  // namespace cpsi
