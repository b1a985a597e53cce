#pragma once

#define BADFLOW_VERSION "0.1.0"
