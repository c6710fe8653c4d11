#pragma once

// Blind source separation for nonnegative, overlapped spectral data:
// Lorentzian peak sharpening, convex-cone mixing-matrix estimation,
// nonnegative source recovery and separation metrics.

#include "peaksharp/errors.hpp"
#include "peaksharp/lorentzian.hpp"
#include "peaksharp/signal.hpp"
#include "peaksharp/nnls.hpp"
#include "peaksharp/vca.hpp"
#include "peaksharp/metrics.hpp"
#include "peaksharp/recovery.hpp"
#include "peaksharp/synth.hpp"
#include "peaksharp/csv_io.hpp"
#include "peaksharp/scenario_io.hpp"
