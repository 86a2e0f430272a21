#include "obs-module.h"

void ApplicationAudioCaptureToolbar::Init()
{
	obs_module_t *mod = obs_get_module("win-wasapi");
	const char *device_str = obs_module_get_locale_text(mod, "Device");
	SetLabelText("device_label", device_str);
}
