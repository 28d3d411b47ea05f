#pragma once

#include "mgcn/dataset.hpp"

namespace mgcn::testing {

/// Four tight, far-apart classes in two views.
inline SynthConfig separable_fixture() {
    SynthConfig c;
    c.n = 400;
    c.class_count = 4;
    c.view_dims = {8, 16};
    c.center_separation = 10.0;
    c.cluster_spread = {0.2};
    c.seed = 7;
    return c;
}

/// Alternating tight and wide classes: the wide ones reach into their
/// neighbours, so fixed-k neighbourhoods cross class lines.
inline SynthConfig interleaved_fixture() {
    SynthConfig c;
    c.n = 400;
    c.class_count = 4;
    c.view_dims = {64, 96};
    c.center_separation = 8.0;
    c.cluster_spread = {0.5, 1.5, 0.5, 1.5};
    c.seed = 11;
    return c;
}

} // namespace mgcn::testing
