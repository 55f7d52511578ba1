//! LDPC code construction, decoding, and transfer measurement.
