// Umbrella header.
#pragma once

#include "poibin/certificates.hpp"
#include "poibin/contour.hpp"
#include "poibin/divergence.hpp"
#include "poibin/errors.hpp"
#include "poibin/harness.hpp"
#include "poibin/instance.hpp"
#include "poibin/pmf.hpp"
#include "poibin/poisson.hpp"
#include "poibin/summation.hpp"
