use super::{Backend, ModelRequest, ModelResponse, Payload, Result};

type Script = dyn Fn(&ModelRequest, &Payload) -> ModelResponse + Send + Sync;

/// In-process backend driven by a closure. Used to record cassettes for
/// fixtures and to stand in for live models in tests.
pub struct ScriptedBackend {
    script: Box<Script>,
}

impl ScriptedBackend {
    pub fn new(script: impl Fn(&ModelRequest, &Payload) -> ModelResponse + Send + Sync + 'static) -> Self {
        Self {
            script: Box::new(script),
        }
    }
}

impl Backend for ScriptedBackend {
    fn call(&self, request: &ModelRequest, payload: &Payload) -> Result<ModelResponse> {
        Ok((self.script)(request, payload))
    }
}
