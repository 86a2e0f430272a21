#include "obs-module.h"

void DisplayCaptureToolbar::Init()
{
	obs_module_t *mod = obs_get_module("win-capture");
	if (!mod)
		return;
	const char *display_str = obs_module_get_locale_text(mod, "Display");
	SetLabelText("display_label", display_str);
}

void AudioCaptureToolbar::Init()
{
	obs_module_t *mod = obs_get_module("win-wasapi");
	if (!mod)
		return;
	const char *device_str = obs_module_get_locale_text(mod, "Device");
	SetLabelText("device_label", device_str);
}

void WindowCaptureToolbar::Init()
{
	obs_module_t *mod = obs_get_module("win-capture");
	if (!mod)
		return;
	const char *window_str = obs_module_get_locale_text(mod, "Window");
	SetLabelText("window_label", window_str);
}
