#pragma once

#include "crm/bounds.hpp"
#include "crm/errors.hpp"
#include "crm/estimator.hpp"
#include "crm/experiment.hpp"
#include "crm/io.hpp"
#include "crm/kernels.hpp"
#include "crm/learners.hpp"
#include "crm/processes.hpp"
#include "crm/sequence.hpp"
