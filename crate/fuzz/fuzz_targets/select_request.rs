#![no_main]

use isostream_core::scoring::Camera;
use isostream_core::selection::SelectionConfig;
use isostream_core::Vec3;
use libfuzzer_sys::fuzz_target;
use serde::Deserialize;

#[derive(Deserialize)]
struct SelectRequest {
    camera: Camera,
    #[serde(default)]
    selection: SelectionConfig,
}

fuzz_target!(|data: &[u8]| {
    let Ok(req) = serde_json::from_slice::<SelectRequest>(data) else { return };
    let _ = req.selection.validate();
    if let Ok(projector) = req.camera.projector() {
        for p in [req.camera.target, req.camera.eye, Vec3::zeros(), Vec3::repeat(1.0)] {
            let _ = projector.project(&p);
        }
    }
});
