use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sentifuse_core::data::{EmbeddingTable, Sentiment};
use sentifuse_core::model::{predict_nearest_label, InputDims, Model, ModelInput, ModelSpec};
use sentifuse_core::nn::{lstm_step, LstmParams};
use sentifuse_core::text::{build_vocabulary, encode_sequence, tokenize};
use sentifuse_core::{Graph, Tensor};

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

fn matmul(c: &mut Criterion) {
    let mut r = rng();
    let a = Tensor::uniform(&[64, 4096], -1.0, 1.0, &mut r).unwrap();
    let b = Tensor::uniform(&[4096, 512], -1.0, 1.0, &mut r).unwrap();
    c.bench_function("matmul 64x4096x512", |bench| {
        bench.iter(|| a.matmul(&b).unwrap())
    });
}

fn lstm(c: &mut Criterion) {
    let mut r = rng();
    let (batch, input, hidden) = (64, 200, 300);
    let mut params = LstmParams::zeros(input, hidden).unwrap();
    params.visit_mut("", &mut |_, t| {
        *t = Tensor::uniform(t.shape(), -0.1, 0.1, &mut r).unwrap()
    });
    let x = Tensor::uniform(&[batch, input], -1.0, 1.0, &mut r).unwrap();
    let h = Tensor::zeros(&[batch, hidden]).unwrap();
    c.bench_function("lstm step forward+backward 64x200x300", |bench| {
        bench.iter(|| {
            let mut g = Graph::new();
            let nodes = params.bind(&mut g, "cell", true);
            let (xn, hn, cn) = (
                g.constant(x.clone()),
                g.constant(h.clone()),
                g.constant(h.clone()),
            );
            let (h2, _) = lstm_step(&mut g, &nodes, xn, hn, cn).unwrap();
            let loss = g.sum(h2);
            g.backward(loss).unwrap()
        })
    });
}

fn image_forward(c: &mut Criterion) {
    let mut r = rng();
    let spec = ModelSpec::preset("image-3class", InputDims::default(), false).unwrap();
    let model = Model::init(spec, &mut r).unwrap();
    let x = Tensor::uniform(&[64, 4096], 0.0, 1.0, &mut r).unwrap();
    c.bench_function("image-3class predict batch 64", |bench| {
        bench.iter(|| model.predict(&ModelInput::Features(&x)).unwrap())
    });
}

fn text(c: &mut Criterion) {
    let title = "Sunset over the bay!";
    let description = "Walked down to the pier (again) and caught this; see https://example.com/pics?id=4 for more. \
                       Lovely colours, calm water, a few gulls, and not a cloud in the sky.";
    let vocab = build_vocabulary(&[tokenize(title, description)], None).unwrap();
    c.bench_function("tokenize+encode", |bench| {
        bench.iter(|| encode_sequence(&vocab, &tokenize(title, description)))
    });
}

fn nearest_label(c: &mut Criterion) {
    let mut r = rng();
    let mut table = EmbeddingTable::new(50);
    for w in ["negative", "neutral", "positive"] {
        table
            .insert(w, Tensor::uniform(&[50], -1.0, 1.0, &mut r).unwrap())
            .unwrap();
    }
    let classes = Sentiment::classes(false);
    c.bench_function("nearest label", |bench| {
        bench.iter_batched(
            || Tensor::uniform(&[50], -1.0, 1.0, &mut r).unwrap(),
            |out| predict_nearest_label(&out, &table, &classes).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, matmul, lstm, image_forward, text, nearest_label);
criterion_main!(benches);
