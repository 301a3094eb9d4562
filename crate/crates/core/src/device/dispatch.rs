use std::sync::mpsc;
use std::thread;

use super::Registry;
use crate::transport::Transport;

type Job<T> = Box<dyn FnOnce(&mut Registry<T>) + Send>;

/// Runs a [`Registry`] on its own thread. All access goes through cloneable
/// [`RegistryHandle`]s, which queue closures onto that thread; listeners
/// therefore always run on the dispatch thread, never on a caller's.
///
/// The thread exits once every handle has been dropped.
pub struct Dispatcher;

impl Dispatcher {
    pub fn spawn<T: Transport + 'static>(registry: Registry<T>) -> RegistryHandle<T> {
        let (tx, rx) = mpsc::channel::<Job<T>>();
        thread::Builder::new()
            .name("hidwire-dispatch".into())
            .spawn(move || {
                let mut registry = registry;
                for job in rx {
                    job(&mut registry);
                }
            })
            .expect("spawn dispatch thread");
        RegistryHandle { tx }
    }
}

pub struct RegistryHandle<T: Transport> {
    tx: mpsc::Sender<Job<T>>,
}

impl<T: Transport> Clone for RegistryHandle<T> {
    fn clone(&self) -> Self {
        RegistryHandle { tx: self.tx.clone() }
    }
}

impl<T: Transport + 'static> RegistryHandle<T> {
    /// Queues `f` and returns immediately.
    pub fn post(&self, f: impl FnOnce(&mut Registry<T>) + Send + 'static) {
        // A closed channel means the dispatch thread is gone; nothing to run on.
        let _ = self.tx.send(Box::new(f));
    }

    /// Runs `f` on the dispatch thread and waits for its result.
    ///
    /// Must not be called from a listener: the dispatch thread would wait on
    /// itself.
    pub fn call<R: Send + 'static>(&self, f: impl FnOnce(&mut Registry<T>) -> R + Send + 'static) -> R {
        let (reply_tx, reply_rx) = mpsc::sync_channel(1);
        self.post(move |registry| {
            let _ = reply_tx.send(f(registry));
        });
        reply_rx.recv().expect("dispatch thread terminated")
    }
}
