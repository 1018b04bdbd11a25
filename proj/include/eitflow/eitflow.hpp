#ifndef EITFLOW_EITFLOW_HPP
#define EITFLOW_EITFLOW_HPP

#include "eitflow/coherence.hpp"
#include "eitflow/constants.hpp"
#include "eitflow/error.hpp"
#include "eitflow/gain.hpp"
#include "eitflow/interferometry.hpp"
#include "eitflow/model.hpp"
#include "eitflow/parallel.hpp"
#include "eitflow/presets.hpp"
#include "eitflow/propagation.hpp"
#include "eitflow/quadrature.hpp"
#include "eitflow/transistor.hpp"

#endif
