#pragma once

#include "rad2img/config.hpp"
#include "rad2img/corpus_io.hpp"
#include "rad2img/csv.hpp"
#include "rad2img/distill.hpp"
#include "rad2img/error.hpp"
#include "rad2img/experiments.hpp"
#include "rad2img/glm.hpp"
#include "rad2img/label_model.hpp"
#include "rad2img/metrics.hpp"
#include "rad2img/report.hpp"
#include "rad2img/serialize.hpp"
#include "rad2img/synthetic.hpp"
