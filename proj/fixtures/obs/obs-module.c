#include <string.h>

#include "obs-module.h"

static obs_module_t *loaded_modules[MAX_MODULES];
static int loaded_module_count;

obs_module_t *obs_get_module(const char *name)
{
	for (int i = 0; i < loaded_module_count; i++) {
		obs_module_t *module = loaded_modules[i];
		if (strcmp(module->mod_name, name) == 0)
			return module;
	}
	return NULL;
}

bool obs_module_get_locale_string(const obs_module_t *mod, const char *lookup_string,
				  const char **translated_string)
{
	if (mod->get_string(lookup_string, translated_string))
		return true;
	*translated_string = lookup_string;
	return false;
}

const char *obs_module_get_locale_text(const obs_module_t *mod, const char *text)
{
	const char *new_text = text;
	obs_module_get_locale_string(mod, text, &new_text);
	return new_text;
}
