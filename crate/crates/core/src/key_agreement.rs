//! Password-authenticated Diffie-Hellman key agreement.
//!
//! Two parties who share a password agree on a session key over a public
//! channel. Both derive from the password a blinding exponent `M` coprime
//! with `n−1`, together with its inverse `M⁻¹ mod (n−1)`. The exchange then
//! runs Diffie-Hellman with blinded exponents:
//!
//! ```text
//! initiator:  K1 = g^(a·M) mod n          responder:  K2 = g^(b·M) mod n
//! initiator:  R  = K2^(M⁻¹) mod n         responder:  X  = K1^(M⁻¹) mod n
//! initiator:  Key1 = R^a mod n            responder:  Key2 = X^b mod n
//! ```
//!
//! Because `M·M⁻¹ ≡ 1 (mod n−1)` and exponents of a prime modulus reduce
//! modulo `n−1` (Fermat's little theorem), matching passwords unblind
//! cleanly and both sides hold `g^(a·b) mod n`. Mismatched passwords leave a
//! stray exponent factor behind and the keys disagree, which is the
//! authentication signal.
//!
//! Arithmetic is arbitrary-precision. Modular exponentiation is implemented
//! by square-and-multiply and modular inversion by the extended Euclidean
//! algorithm; both are oracle-tested against naive reference computations.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Name of the password-to-digest hash, recorded in simulation trace headers
/// so traces document how `M` was derived.
pub const DIGEST_SCHEME: &str = "sha-256";

/// The 2048-bit prime of the well-known MODP group 14 (a safe prime), used as
/// the default production-scale group with generator 2.
const MODP_2048_HEX: &str = concat!(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74",
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437",
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05",
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB",
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B",
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718",
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
);

/// Errors from the key-agreement primitives and handshake state machine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeyAgreementError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(BigUint),
    #[error("{value} has no inverse modulo {modulus}: gcd is {gcd}, not 1")]
    NotInvertible {
        value: BigUint,
        modulus: BigUint,
        gcd: BigUint,
    },
    #[error("modulus {0} failed the primality check")]
    NotPrime(BigUint),
    #[error("generator must satisfy 1 < g < n")]
    GeneratorOutOfRange,
    #[error("password must be non-empty")]
    EmptyPassword,
    #[error("secret exponent must satisfy 1 ≤ exponent < n−1")]
    ExponentOutOfRange,
    #[error("peer value must satisfy 0 < value < n")]
    PeerValueOutOfRange,
    #[error("operation requires session state {expected}, but the session is {actual}")]
    WrongState {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("group is too small to sample a secret exponent from [2, n−2]")]
    GroupTooSmall,
    #[error("malformed wire message: {0}")]
    MalformedMessage(String),
}

/// Lowercase hex encoding (no external dependency needed for a one-liner).
pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// -- modular arithmetic primitives -------------------------------------------------

/// `base^exponent mod modulus` by binary square-and-multiply; result in
/// `[0, modulus)`. Errors when `modulus < 2`.
pub fn mod_pow(
    base: &BigUint,
    exponent: &BigUint,
    modulus: &BigUint,
) -> Result<BigUint, KeyAgreementError> {
    if *modulus < BigUint::from(2u32) {
        return Err(KeyAgreementError::ModulusTooSmall(modulus.clone()));
    }
    let mut result = BigUint::one();
    let mut square = base % modulus;
    let bits = exponent.bits();
    for i in 0..bits {
        if exponent.bit(i) {
            result = &result * &square % modulus;
        }
        if i + 1 < bits {
            square = &square * &square % modulus;
        }
    }
    Ok(result % modulus)
}

/// The inverse of `m` modulo `modulus`, in `[1, modulus)`, by the extended
/// Euclidean algorithm. Errors when `gcd(m, modulus) ≠ 1`.
pub fn mod_inverse(m: &BigUint, modulus: &BigUint) -> Result<BigUint, KeyAgreementError> {
    if *modulus < BigUint::from(2u32) {
        return Err(KeyAgreementError::ModulusTooSmall(modulus.clone()));
    }
    let modulus_int = BigInt::from(modulus.clone());
    // Invariant maintained by the iteration: old_r = old_s·m (mod modulus).
    let mut old_r = BigInt::from(m % modulus);
    let mut r = modulus_int.clone();
    let mut old_s = BigInt::one();
    let mut s = BigInt::zero();
    while !r.is_zero() {
        let quotient = &old_r / &r;
        let next_r = &old_r - &quotient * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &quotient * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        let gcd = old_r.to_biguint().expect("gcd of non-negative inputs");
        return Err(KeyAgreementError::NotInvertible {
            value: m.clone(),
            modulus: modulus.clone(),
            gcd,
        });
    }
    let inverse = old_s.mod_floor(&modulus_int);
    Ok(inverse.to_biguint().expect("mod_floor of positive modulus"))
}

/// Miller-Rabin primality test with the fixed witness set
/// {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}: deterministic for inputs
/// below 3.3·10²⁴, a strong probabilistic check beyond.
pub fn is_probable_prime(n: &BigUint) -> bool {
    const WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    const SMALL_PRIMES: [u32; 25] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97,
    ];
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for p in SMALL_PRIMES {
        let p_big = BigUint::from(p);
        if *n == p_big {
            return true;
        }
        if (n % p_big).is_zero() {
            return false;
        }
    }
    // n is odd and > 97 at this point. Write n−1 = d·2^s.
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().expect("n−1 > 0");
    let d = &n_minus_1 >> s;
    'witness: for a in WITNESSES {
        let mut x = mod_pow(&BigUint::from(a), &d, n).expect("modulus ≥ 2");
        if x.is_one() || x == n_minus_1 {
            continue 'witness;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// -- public parameters and password digest -----------------------------------------

/// The public Diffie-Hellman group: a prime modulus `n` and a generator `g`
/// with `1 < g < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    n: BigUint,
    g: BigUint,
}

impl PublicParams {
    /// Validates `n` prime (probabilistic primality check) and `1 < g < n`.
    pub fn new(n: BigUint, g: BigUint) -> Result<Self, KeyAgreementError> {
        if !is_probable_prime(&n) {
            return Err(KeyAgreementError::NotPrime(n));
        }
        if g <= BigUint::one() || g >= n {
            return Err(KeyAgreementError::GeneratorOutOfRange);
        }
        Ok(Self { n, g })
    }

    /// The well-known 2048-bit MODP group (safe prime, generator 2) — the
    /// default production-scale parameter set.
    pub fn modp2048() -> Self {
        let n = BigUint::parse_bytes(MODP_2048_HEX.as_bytes(), 16).expect("valid hex constant");
        Self::new(n, BigUint::from(2u32)).expect("known prime group")
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }
}

/// The password-derived blinding exponent and its inverse modulo `n−1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PasswordDigest {
    m: BigUint,
    m_inv: BigUint,
}

impl PasswordDigest {
    /// The degenerate digest `M = M⁻¹ = 1`, which reduces the protocol to
    /// plain unauthenticated Diffie-Hellman. Exposed for debugging and
    /// reference comparisons.
    pub fn plain() -> Self {
        Self {
            m: BigUint::one(),
            m_inv: BigUint::one(),
        }
    }

    pub fn m(&self) -> &BigUint {
        &self.m
    }

    pub fn m_inv(&self) -> &BigUint {
        &self.m_inv
    }
}

/// Derives the blinding exponent from a password, deterministically:
///
/// 1. `h` = SHA-256(password) read as a big-endian integer;
/// 2. `M₀ = 1 + (h mod (n−2))`, which lands in `[1, n−1)`;
/// 3. `M` = first integer ≥ `M₀` with `gcd(M, n−1) = 1`, wrapping around to 1
///    at the top of the interval (a unit always exists, e.g. 1);
/// 4. `M⁻¹ = mod_inverse(M, n−1)`.
///
/// Same password and parameters always give the same digest.
pub fn derive_digest(
    password: &[u8],
    params: &PublicParams,
) -> Result<PasswordDigest, KeyAgreementError> {
    if password.is_empty() {
        return Err(KeyAgreementError::EmptyPassword);
    }
    let n_minus_1 = params.n() - 1u32;
    let n_minus_2 = params.n() - 2u32;
    let hash = Sha256::digest(password);
    let h = BigUint::from_bytes_be(&hash);
    let mut candidate = BigUint::one() + h % &n_minus_2;
    loop {
        if candidate.gcd(&n_minus_1).is_one() {
            break;
        }
        candidate += 1u32;
        if candidate == n_minus_1 {
            candidate = BigUint::one();
        }
    }
    let m_inv = mod_inverse(&candidate, &n_minus_1)?;
    Ok(PasswordDigest {
        m: candidate,
        m_inv,
    })
}

// -- handshake state machine -----------------------------------------------------

/// Which side of the exchange a session drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Initiator,
    Responder,
}

/// Handshake progress. Transitions only Fresh → Sent → Established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Fresh,
    Sent,
    Established,
}

impl SessionState {
    fn name(self) -> &'static str {
        match self {
            SessionState::Fresh => "Fresh",
            SessionState::Sent => "Sent",
            SessionState::Established => "Established",
        }
    }
}

/// One party's handshake state: parameters, password digest, secret exponent,
/// and the derived key once established.
///
/// Sessions are single-owner state machines; distinct sessions are
/// independent and may run on different threads.
#[derive(Debug, Clone)]
pub struct HandshakeSession {
    role: Role,
    params: PublicParams,
    digest: PasswordDigest,
    secret_exponent: BigUint,
    state: SessionState,
    shared_key: Option<BigUint>,
}

impl HandshakeSession {
    /// Builds a fresh session. The secret exponent must satisfy
    /// `1 ≤ exponent < n−1`.
    pub fn new(
        role: Role,
        params: PublicParams,
        digest: PasswordDigest,
        secret_exponent: BigUint,
    ) -> Result<Self, KeyAgreementError> {
        let n_minus_1 = params.n() - 1u32;
        if secret_exponent.is_zero() || secret_exponent >= n_minus_1 {
            return Err(KeyAgreementError::ExponentOutOfRange);
        }
        Ok(Self {
            role,
            params,
            digest,
            secret_exponent,
            state: SessionState::Fresh,
            shared_key: None,
        })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    /// The established key, once [`derive_shared_key`](Self::derive_shared_key)
    /// has run.
    pub fn shared_key(&self) -> Option<&BigUint> {
        self.shared_key.as_ref()
    }

    fn expect_state(&self, expected: SessionState) -> Result<(), KeyAgreementError> {
        if self.state != expected {
            return Err(KeyAgreementError::WrongState {
                expected: expected.name(),
                actual: self.state.name(),
            });
        }
        Ok(())
    }

    /// Produces this side's exchange value `g^(secret·M) mod n` and moves the
    /// session from Fresh to Sent.
    pub fn make_public_value(&mut self) -> Result<BigUint, KeyAgreementError> {
        self.expect_state(SessionState::Fresh)?;
        let exponent = &self.secret_exponent * self.digest.m();
        let value = mod_pow(self.params.g(), &exponent, self.params.n())?;
        self.state = SessionState::Sent;
        Ok(value)
    }

    /// Unblinds the peer's exchange value and derives the shared key:
    /// `(peer^(M⁻¹))^secret mod n`. Moves the session from Sent to
    /// Established. With matching passwords both sides end up holding
    /// `g^(a·b) mod n`.
    pub fn derive_shared_key(
        &mut self,
        peer_value: &BigUint,
    ) -> Result<BigUint, KeyAgreementError> {
        self.expect_state(SessionState::Sent)?;
        if peer_value.is_zero() || peer_value >= self.params.n() {
            return Err(KeyAgreementError::PeerValueOutOfRange);
        }
        let unblinded = mod_pow(peer_value, self.digest.m_inv(), self.params.n())?;
        let key = mod_pow(&unblinded, &self.secret_exponent, self.params.n())?;
        self.state = SessionState::Established;
        self.shared_key = Some(key.clone());
        Ok(key)
    }
}

/// Samples a secret exponent uniformly from `[2, n−2]` using rejection
/// sampling on the caller's generator. Deterministic for a deterministic
/// generator. Errors for groups with `n < 5`, which have no such exponent.
pub fn sample_exponent<R: RngCore + ?Sized>(
    params: &PublicParams,
    rng: &mut R,
) -> Result<BigUint, KeyAgreementError> {
    if *params.n() < BigUint::from(5u32) {
        return Err(KeyAgreementError::GroupTooSmall);
    }
    let span = params.n() - 3u32; // |[2, n−2]| = n−3 candidate values
    let bits = span.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess_bits = bytes as u64 * 8 - bits;
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xffu8 >> excess_bits;
        let value = BigUint::from_bytes_be(&buf);
        if value < span {
            return Ok(value + 2u32);
        }
    }
}

// -- wire encoding ---------------------------------------------------------------

/// Encodes an exchange value for the wire: 4-byte big-endian length prefix
/// followed by the value's unsigned big-endian bytes.
pub fn encode_message(value: &BigUint) -> Vec<u8> {
    let bytes = value.to_bytes_be();
    let mut out = Vec::with_capacity(4 + bytes.len());
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(&bytes);
    out
}

/// Decodes one wire message, returning the value and the number of bytes
/// consumed.
pub fn decode_message(buf: &[u8]) -> Result<(BigUint, usize), KeyAgreementError> {
    if buf.len() < 4 {
        return Err(KeyAgreementError::MalformedMessage(
            "truncated length prefix".into(),
        ));
    }
    let len = u32::from_be_bytes(buf[0..4].try_into().expect("4-byte slice")) as usize;
    if buf.len() < 4 + len {
        return Err(KeyAgreementError::MalformedMessage(format!(
            "payload declares {len} bytes but only {} are present",
            buf.len() - 4
        )));
    }
    Ok((BigUint::from_bytes_be(&buf[4..4 + len]), 4 + len))
}

/// Short identifier of a key for traces and logs: lowercase hex of the first
/// 8 bytes of SHA-256 over the key's unsigned big-endian bytes. Never exposes
/// key material.
pub fn key_fingerprint(key: &BigUint) -> String {
    let digest = Sha256::digest(key.to_bytes_be());
    hex(&digest[..8])
}

// -- scripted two-party exchange ----------------------------------------------------

/// Result of a complete two-message exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandshakeOutcome {
    pub key_initiator: BigUint,
    pub key_responder: BigUint,
    /// The exchanged public values in order: `[K1, K2]`.
    pub transcript: Vec<BigUint>,
    /// Whether both sides derived the same key.
    pub keys_match: bool,
}

/// Runs the two-message exchange with explicit digests (used by the plain-DH
/// debug mode and by tests that need hand-picked `M` values).
pub fn run_handshake_with_digests(
    digest_initiator: PasswordDigest,
    digest_responder: PasswordDigest,
    params: &PublicParams,
    a: &BigUint,
    b: &BigUint,
) -> Result<HandshakeOutcome, KeyAgreementError> {
    let mut initiator = HandshakeSession::new(
        Role::Initiator,
        params.clone(),
        digest_initiator,
        a.clone(),
    )?;
    let mut responder = HandshakeSession::new(
        Role::Responder,
        params.clone(),
        digest_responder,
        b.clone(),
    )?;

    // The exchange values cross a byte channel exactly as the backend would
    // carry them.
    let k1_wire = encode_message(&initiator.make_public_value()?);
    let (k1, _) = decode_message(&k1_wire)?;
    let k2_wire = encode_message(&responder.make_public_value()?);
    let (k2, _) = decode_message(&k2_wire)?;

    let key_initiator = initiator.derive_shared_key(&k2)?;
    let key_responder = responder.derive_shared_key(&k1)?;
    let keys_match = key_initiator == key_responder;
    Ok(HandshakeOutcome {
        key_initiator,
        key_responder,
        transcript: vec![k1, k2],
        keys_match,
    })
}

/// Executes the two-message exchange between parties holding the given
/// passwords and secret exponents; returns both derived keys and the ordered
/// transcript `[K1, K2]`.
pub fn run_handshake(
    initiator_password: &[u8],
    responder_password: &[u8],
    params: &PublicParams,
    a: &BigUint,
    b: &BigUint,
) -> Result<HandshakeOutcome, KeyAgreementError> {
    let digest_initiator = derive_digest(initiator_password, params)?;
    let digest_responder = derive_digest(responder_password, params)?;
    run_handshake_with_digests(digest_initiator, digest_responder, params, a, b)
}
