#pragma once

#include "errors.hpp"
#include "experiments.hpp"
#include "fft.hpp"
#include "fields.hpp"
#include "fit.hpp"
#include "grid.hpp"
#include "harmonic.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "norms.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "symbols.hpp"
#include "weights.hpp"
