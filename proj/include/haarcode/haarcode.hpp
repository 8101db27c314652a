#pragma once

// Haar-random codes under Pauli noise: sampling, channels, spectra,
// closed-form predictions, postselection and sweep drivers.

#include "haarcode/ansatz.hpp"
#include "haarcode/channels.hpp"
#include "haarcode/code_ensemble.hpp"
#include "haarcode/combinatorics.hpp"
#include "haarcode/common.hpp"
#include "haarcode/density.hpp"
#include "haarcode/errors.hpp"
#include "haarcode/experiments.hpp"
#include "haarcode/linalg.hpp"
#include "haarcode/pauli.hpp"
#include "haarcode/postselection.hpp"
#include "haarcode/rng.hpp"
#include "haarcode/spectra.hpp"
