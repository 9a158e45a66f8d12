#pragma once

#include "e2e/types.hpp"

namespace e2e::dsp {

/// Root-raised-cosine taps of length span * sps + 1, L2-normalized.
FilterTaps rrc_taps(int sps, int span, double rolloff);

/// RRC generated with at least `span` symbols of support, then
/// center-truncated to n_taps and renormalized.
FilterTaps rrc_init(int sps, Eigen::Index n_taps, double rolloff, int span = 24);

}  // namespace e2e::dsp
