// Reserve-recovery attack on constant function market makers, the
// mitigations against it, and the experiment harness.
#pragma once

#include "cfmm_privacy/analysis.hpp"
#include "cfmm_privacy/attack.hpp"
#include "cfmm_privacy/core.hpp"
#include "cfmm_privacy/errors.hpp"
#include "cfmm_privacy/harness.hpp"
#include "cfmm_privacy/lp.hpp"
#include "cfmm_privacy/mitigations.hpp"
#include "cfmm_privacy/oracle.hpp"
#include "cfmm_privacy/probe.hpp"
#include "cfmm_privacy/rng.hpp"
#include "cfmm_privacy/serialization.hpp"
#include "cfmm_privacy/spec_io.hpp"
