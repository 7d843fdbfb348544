#pragma once

#include "bosonstar/errors.hpp"
#include "bosonstar/grid.hpp"
#include "bosonstar/fft.hpp"
#include "bosonstar/field.hpp"
#include "bosonstar/multiplier.hpp"
#include "bosonstar/snapshot.hpp"
#include "bosonstar/potentials.hpp"
#include "bosonstar/observables.hpp"
#include "bosonstar/dynamics.hpp"
#include "bosonstar/fit.hpp"
#include "bosonstar/scattering.hpp"
#include "bosonstar/parallel.hpp"
#include "bosonstar/config.hpp"
#include "bosonstar/report.hpp"
#include "bosonstar/experiments.hpp"
