#pragma once

#include "hsn/errors.hpp"
#include "hsn/matrix.hpp"
#include "hsn/graph.hpp"
#include "hsn/spectral.hpp"
#include "hsn/wavelets.hpp"
#include "hsn/nonlinearity.hpp"
#include "hsn/autodiff.hpp"
#include "hsn/scattering.hpp"
#include "hsn/layers.hpp"
#include "hsn/model.hpp"
#include "hsn/train.hpp"
#include "hsn/theory.hpp"
#include "hsn/fixtures.hpp"
#include "hsn/dataset.hpp"
#include "hsn/config.hpp"
#include "hsn/experiment.hpp"
#include "hsn/gradcheck.hpp"
#include "hsn/verification.hpp"
