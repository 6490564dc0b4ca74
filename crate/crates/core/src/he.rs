//! Additively homomorphic encryption (Paillier, g = n+1) and a simulated
//! federated-averaging round where the aggregator sees only ciphertexts.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FlepError, Result};

const SUPPORTED_BITS: [usize; 3] = [512, 1024, 2048];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HePublicKey {
    n: BigUint,
    n_squared: BigUint,
    key_id: String,
}

impl HePublicKey {
    fn from_modulus(n: BigUint) -> Self {
        let key_id = {
            let digest = Sha256::digest(n.to_bytes_be());
            digest[..8].iter().map(|b| format!("{b:02x}")).collect()
        };
        let n_squared = &n * &n;
        Self {
            n,
            n_squared,
            key_id,
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    pub fn key_id(&self) -> &str {
        &self.key_id
    }
}

#[derive(Debug, Clone)]
pub struct HeKeyPair {
    public: HePublicKey,
    lambda: BigUint,
    mu: BigUint,
    pub bit_length: usize,
}

impl HeKeyPair {
    pub fn public(&self) -> &HePublicKey {
        &self.public
    }

    /// Builds a keypair from two distinct primes. Used for production keys
    /// after prime generation and directly for small test keys.
    pub fn from_primes(p: &BigUint, q: &BigUint) -> Result<Self> {
        if p == q {
            return Err(FlepError::He("primes must be distinct".into()));
        }
        let n = p * q;
        let lambda = (p - 1u32).lcm(&(q - 1u32));
        // With g = n+1, L(g^lambda mod n^2) = lambda mod n, so mu is just
        // its modular inverse.
        let mu = (&lambda % &n)
            .modinv(&n)
            .ok_or_else(|| FlepError::He("lambda is not invertible mod n".into()))?;
        let bit_length = n.bits() as usize;
        Ok(Self {
            public: HePublicKey::from_modulus(n),
            lambda,
            mu,
            bit_length,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    value: BigUint,
    key_id: String,
}

impl Ciphertext {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn key_id(&self) -> &str {
        &self.key_id
    }
}

/// Generates a keypair with two random primes of half the requested size.
pub fn keygen(bit_length: usize, rng: &mut impl RngCore) -> Result<HeKeyPair> {
    if !SUPPORTED_BITS.contains(&bit_length) {
        return Err(FlepError::He(format!(
            "unsupported size {bit_length}; expected one of {SUPPORTED_BITS:?}"
        )));
    }
    let p = generate_prime(bit_length / 2, rng)?;
    let q = loop {
        let candidate = generate_prime(bit_length / 2, rng)?;
        if candidate != p {
            break candidate;
        }
    };
    HeKeyPair::from_primes(&p, &q)
}

fn generate_prime(bits: usize, rng: &mut impl RngCore) -> Result<BigUint> {
    // Top two bits set so the product of two such primes has full length.
    let top: BigUint = (BigUint::from(3u8)) << (bits - 2);
    for _ in 0..50_000 {
        let mut candidate = rng.gen_biguint((bits - 2) as u64) | &top;
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, rng, 25) {
            return Ok(candidate);
        }
    }
    Err(FlepError::He(format!(
        "prime generation failed for {bits} bits"
    )))
}

fn is_probable_prime(n: &BigUint, rng: &mut impl RngCore, rounds: usize) -> bool {
    const SMALL_PRIMES: [u32; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    // Miller-Rabin with random bases.
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&BigUint::from(2u8), &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 0..s.saturating_sub(1) {
            x = x.modpow(&BigUint::from(2u8), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// c = (1 + m*n) * r^n mod n^2 with fresh r coprime to n.
pub fn encrypt(m: &BigUint, public: &HePublicKey, rng: &mut impl RngCore) -> Result<Ciphertext> {
    if m >= &public.n {
        return Err(FlepError::He(format!(
            "plaintext {m} out of range for modulus"
        )));
    }
    let r = loop {
        let candidate = rng.gen_biguint_range(&BigUint::from(2u8), &public.n);
        if candidate.gcd(&public.n).is_one() {
            break candidate;
        }
    };
    // g = n+1 makes g^m mod n^2 equal 1 + m*n by the binomial identity.
    let g_m = (BigUint::one() + m * &public.n) % &public.n_squared;
    let value = (g_m * r.modpow(&public.n, &public.n_squared)) % &public.n_squared;
    Ok(Ciphertext {
        value,
        key_id: public.key_id.clone(),
    })
}

/// m = L(c^lambda mod n^2) * mu mod n, with L(u) = (u - 1) / n.
pub fn decrypt(c: &Ciphertext, keys: &HeKeyPair) -> Result<BigUint> {
    let public = &keys.public;
    if c.key_id != public.key_id {
        return Err(FlepError::He(format!(
            "ciphertext under key {} cannot be decrypted with key {}",
            c.key_id, public.key_id
        )));
    }
    if c.value.is_zero() || c.value >= public.n_squared {
        return Err(FlepError::He("ciphertext value out of range".into()));
    }
    let u = c.value.modpow(&keys.lambda, &public.n_squared);
    let l = (u - BigUint::one()) / &public.n;
    Ok((l * &keys.mu) % &public.n)
}

/// Ciphertext of the sum: multiply mod n^2.
pub fn he_add(c1: &Ciphertext, c2: &Ciphertext, public: &HePublicKey) -> Result<Ciphertext> {
    if c1.key_id != c2.key_id || c1.key_id != public.key_id {
        return Err(FlepError::He("key mismatch in homomorphic add".into()));
    }
    Ok(Ciphertext {
        value: (&c1.value * &c2.value) % &public.n_squared,
        key_id: c1.key_id.clone(),
    })
}

/// Ciphertext of k times the plaintext: exponentiate mod n^2.
pub fn he_scalar_mul(c: &Ciphertext, k: u64, public: &HePublicKey) -> Result<Ciphertext> {
    if c.key_id != public.key_id {
        return Err(FlepError::He("key mismatch in scalar multiply".into()));
    }
    Ok(Ciphertext {
        value: c.value.modpow(&BigUint::from(k), &public.n_squared),
        key_id: c.key_id.clone(),
    })
}

/// Signed fixed-point encoding into Z_n: round(x * 2^f), negatives stored
/// as n - |v|.
pub fn encode_fixed(x: f64, fractional_bits: u32, n: &BigUint) -> Result<BigUint> {
    if !x.is_finite() {
        return Err(FlepError::He(format!("cannot encode {x}")));
    }
    let scaled = (x * (1u64 << fractional_bits) as f64).round();
    let magnitude = BigUint::from(scaled.abs() as u64);
    let half_n = n >> 1;
    if magnitude >= half_n {
        return Err(FlepError::He(format!(
            "value {x} overflows fixed-point range at {fractional_bits} fractional bits"
        )));
    }
    if scaled < 0.0 {
        Ok(n - magnitude)
    } else {
        Ok(magnitude)
    }
}

/// Inverse of [`encode_fixed`]; values at or above n/2 read as negative.
pub fn decode_fixed(v: &BigUint, fractional_bits: u32, n: &BigUint) -> f64 {
    let scale = (1u64 << fractional_bits) as f64;
    let half_n = n >> 1;
    if v >= &half_n {
        let magnitude = n - v;
        -magnitude.to_f64().unwrap_or(f64::INFINITY) / scale
    } else {
        v.to_f64().unwrap_or(f64::INFINITY) / scale
    }
}

/// The aggregator role: holds the public key only, never the private half.
pub struct Aggregator<'a> {
    public: &'a HePublicKey,
}

impl<'a> Aggregator<'a> {
    pub fn new(public: &'a HePublicKey) -> Self {
        Self { public }
    }

    /// Elementwise homomorphic sum across client ciphertext vectors, in
    /// ascending client order.
    pub fn sum(&self, client_vectors: &[Vec<Ciphertext>]) -> Result<Vec<Ciphertext>> {
        let first = client_vectors
            .first()
            .ok_or_else(|| FlepError::He("no clients".into()))?;
        let mut acc = first.clone();
        for vector in &client_vectors[1..] {
            if vector.len() != acc.len() {
                return Err(FlepError::He(format!(
                    "client vector length {} does not match {}",
                    vector.len(),
                    acc.len()
                )));
            }
            for (a, c) in acc.iter_mut().zip(vector) {
                *a = he_add(a, c, self.public)?;
            }
        }
        Ok(acc)
    }
}

/// One secure federated-averaging round: each client encrypts its encoded
/// weights, the aggregator sums ciphertexts, the key holder decrypts and
/// averages. The result matches plaintext averaging within the fixed-point
/// quantization.
pub fn fl_round(
    clients: &[Vec<f64>],
    keys: &HeKeyPair,
    fractional_bits: u32,
    rng: &mut impl RngCore,
) -> Result<Vec<f64>> {
    let first = clients
        .first()
        .ok_or_else(|| FlepError::He("at least one client required".into()))?;
    let len = first.len();
    let n = keys.public().modulus();

    // Clients: encode and encrypt. The per-weight bound keeps the summed
    // plaintexts clear of wraparound.
    let mut encrypted = Vec::with_capacity(clients.len());
    for weights in clients {
        if weights.len() != len {
            return Err(FlepError::He(format!(
                "client vector length {} does not match {len}",
                weights.len()
            )));
        }
        let vector: Vec<Ciphertext> = weights
            .iter()
            .map(|&w| {
                let bound_scale = (clients.len() as f64) * 2.0;
                if (w.abs() * (1u64 << fractional_bits) as f64) * bound_scale
                    >= n.to_f64().unwrap_or(f64::INFINITY)
                {
                    return Err(FlepError::He(format!("weight {w} out of encoding bounds")));
                }
                encrypt(&encode_fixed(w, fractional_bits, n)?, keys.public(), rng)
            })
            .collect::<Result<_>>()?;
        encrypted.push(vector);
    }

    // Untrusted aggregation over ciphertexts only.
    let sums = Aggregator::new(keys.public()).sum(&encrypted)?;

    // Trusted decryptor: decrypt, decode, average.
    let count = clients.len() as f64;
    sums.iter()
        .map(|c| Ok(decode_fixed(&decrypt(c, keys)?, fractional_bits, n) / count))
        .collect()
}

// --- serialization: big integers as lowercase hex in JSON-shaped text ---

#[derive(Serialize, Deserialize)]
struct KeyPairWire {
    n: String,
    lambda: String,
    mu: String,
    bit_length: usize,
}

#[derive(Serialize, Deserialize)]
struct CiphertextVectorWire {
    key_id: String,
    values: Vec<String>,
}

fn to_hex(v: &BigUint) -> String {
    format!("{v:x}")
}

fn from_hex(text: &str) -> Result<BigUint> {
    BigUint::parse_bytes(text.as_bytes(), 16)
        .ok_or_else(|| FlepError::He(format!("bad hex big integer {text:?}")))
}

pub fn serialize_keypair(keys: &HeKeyPair) -> String {
    serde_json::to_string_pretty(&KeyPairWire {
        n: to_hex(&keys.public.n),
        lambda: to_hex(&keys.lambda),
        mu: to_hex(&keys.mu),
        bit_length: keys.bit_length,
    })
    .expect("keypair serializes")
}

pub fn parse_keypair(text: &str) -> Result<HeKeyPair> {
    let wire: KeyPairWire = serde_json::from_str(text)?;
    Ok(HeKeyPair {
        public: HePublicKey::from_modulus(from_hex(&wire.n)?),
        lambda: from_hex(&wire.lambda)?,
        mu: from_hex(&wire.mu)?,
        bit_length: wire.bit_length,
    })
}

pub fn serialize_ciphertexts(cts: &[Ciphertext]) -> Result<String> {
    let key_id = cts
        .first()
        .map(|c| c.key_id.clone())
        .ok_or_else(|| FlepError::He("empty ciphertext vector".into()))?;
    if cts.iter().any(|c| c.key_id != key_id) {
        return Err(FlepError::He("mixed key ids in ciphertext vector".into()));
    }
    Ok(serde_json::to_string_pretty(&CiphertextVectorWire {
        key_id,
        values: cts.iter().map(|c| to_hex(&c.value)).collect(),
    })
    .expect("ciphertexts serialize"))
}

pub fn parse_ciphertexts(text: &str) -> Result<Vec<Ciphertext>> {
    let wire: CiphertextVectorWire = serde_json::from_str(text)?;
    wire.values
        .iter()
        .map(|v| {
            Ok(Ciphertext {
                value: from_hex(v)?,
                key_id: wire.key_id.clone(),
            })
        })
        .collect()
}
