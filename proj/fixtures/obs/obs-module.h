#pragma once

#include <stdbool.h>

#define MAX_MODULES 32

struct obs_module {
	const char *mod_name;
	bool (*get_string)(const char *lookup_string, const char **translated_string);
};

typedef struct obs_module obs_module_t;

obs_module_t *obs_get_module(const char *name);

bool obs_module_get_locale_string(const obs_module_t *mod, const char *lookup_string,
				  const char **translated_string);

const char *obs_module_get_locale_text(const obs_module_t *mod, const char *text);
