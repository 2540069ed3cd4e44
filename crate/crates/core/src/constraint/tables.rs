//! Static base-relation vocabularies and composition tables.

pub(crate) const ALLEN_RELATIONS: [&str; 13] = [
    "before",
    "after",
    "meets",
    "met-by",
    "overlaps",
    "overlapped-by",
    "starts",
    "started-by",
    "during",
    "contains",
    "finishes",
    "finished-by",
    "equals",
];

pub(crate) const ALLEN_CONVERSE: [usize; 13] = [1, 0, 3, 2, 5, 4, 7, 6, 9, 8, 11, 10, 12];

/// `ALLEN_COMPOSITION[r][s]` is the bitmask of relations `t` with `x t z`
/// possible given `x r y` and `y s z`. Row/column order follows
/// [`ALLEN_RELATIONS`]; bit `k` stands for relation `k`.
#[rustfmt::skip]
pub(crate) const ALLEN_COMPOSITION: [[u32; 13]; 13] = [
    [0x0001, 0x1fff, 0x0001, 0x0155, 0x0001, 0x0155, 0x0001, 0x0001, 0x0155, 0x0001, 0x0155, 0x0001, 0x0001],
    [0x1fff, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x0002, 0x0002, 0x0002],
    [0x0001, 0x02aa, 0x0001, 0x1c00, 0x0001, 0x0150, 0x0004, 0x0004, 0x0150, 0x0001, 0x0150, 0x0001, 0x0004],
    [0x0a15, 0x0002, 0x10c0, 0x0002, 0x0520, 0x0002, 0x0520, 0x0002, 0x0520, 0x0002, 0x0008, 0x0008, 0x0008],
    [0x0001, 0x02aa, 0x0001, 0x02a0, 0x0015, 0x1ff0, 0x0010, 0x0a10, 0x0150, 0x0a15, 0x0150, 0x0015, 0x0010],
    [0x0a15, 0x0002, 0x0a10, 0x0002, 0x1ff0, 0x002a, 0x0520, 0x002a, 0x0520, 0x02aa, 0x0020, 0x02a0, 0x0020],
    [0x0001, 0x0002, 0x0001, 0x0008, 0x0015, 0x0520, 0x0040, 0x10c0, 0x0100, 0x0a15, 0x0100, 0x0015, 0x0040],
    [0x0a15, 0x0002, 0x0a10, 0x0008, 0x0a10, 0x0020, 0x10c0, 0x0080, 0x0520, 0x0200, 0x0020, 0x0200, 0x0080],
    [0x0001, 0x0002, 0x0001, 0x0002, 0x0155, 0x052a, 0x0100, 0x052a, 0x0100, 0x1fff, 0x0100, 0x0155, 0x0100],
    [0x0a15, 0x02aa, 0x0a10, 0x02a0, 0x0a10, 0x02a0, 0x0a10, 0x0200, 0x1ff0, 0x0200, 0x02a0, 0x0200, 0x0200],
    [0x0001, 0x0002, 0x0004, 0x0002, 0x0150, 0x002a, 0x0100, 0x002a, 0x0100, 0x02aa, 0x0400, 0x1c00, 0x0400],
    [0x0001, 0x02aa, 0x0004, 0x02a0, 0x0010, 0x02a0, 0x0010, 0x0200, 0x0150, 0x0200, 0x1c00, 0x0800, 0x0800],
    [0x0001, 0x0002, 0x0004, 0x0008, 0x0010, 0x0020, 0x0040, 0x0080, 0x0100, 0x0200, 0x0400, 0x0800, 0x1000],
];

pub(crate) const RCC8_RELATIONS: [&str; 8] = ["DC", "EC", "PO", "TPP", "NTPP", "TPPi", "NTPPi", "EQ"];

pub(crate) const RCC8_CONVERSE: [usize; 8] = [0, 1, 2, 5, 6, 3, 4, 7];

/// RCC8 composition, one row per left operand. `*` is the universal relation.
#[rustfmt::skip]
pub(crate) const RCC8_COMPOSITION: [[&str; 8]; 8] = [
    // DC
    ["*", "DC EC PO TPP NTPP", "DC EC PO TPP NTPP", "DC EC PO TPP NTPP", "DC EC PO TPP NTPP", "DC", "DC", "DC"],
    // EC
    ["DC EC PO TPPi NTPPi", "DC EC PO TPP TPPi EQ", "DC EC PO TPP NTPP", "EC PO TPP NTPP", "PO TPP NTPP", "DC EC", "DC", "EC"],
    // PO
    ["DC EC PO TPPi NTPPi", "DC EC PO TPPi NTPPi", "*", "PO TPP NTPP", "PO TPP NTPP", "DC EC PO TPPi NTPPi", "DC EC PO TPPi NTPPi", "PO"],
    // TPP
    ["DC", "DC EC", "DC EC PO TPP NTPP", "TPP NTPP", "NTPP", "DC EC PO TPP TPPi EQ", "DC EC PO TPPi NTPPi", "TPP"],
    // NTPP
    ["DC", "DC", "DC EC PO TPP NTPP", "NTPP", "NTPP", "DC EC PO TPP NTPP", "*", "NTPP"],
    // TPPi
    ["DC EC PO TPPi NTPPi", "EC PO TPPi NTPPi", "PO TPPi NTPPi", "PO TPP TPPi EQ", "PO TPP NTPP", "TPPi NTPPi", "NTPPi", "TPPi"],
    // NTPPi
    ["DC EC PO TPPi NTPPi", "PO TPPi NTPPi", "PO TPPi NTPPi", "PO TPPi NTPPi", "PO TPP NTPP TPPi NTPPi EQ", "NTPPi", "NTPPi", "NTPPi"],
    // EQ
    ["DC", "EC", "PO", "TPP", "NTPP", "TPPi", "NTPPi", "EQ"],
];

pub(crate) const POINT_RELATIONS: [&str; 3] = ["lt", "eq", "gt"];

pub(crate) const POINT_CONVERSE: [usize; 3] = [2, 1, 0];

#[rustfmt::skip]
pub(crate) const POINT_COMPOSITION: [[&str; 3]; 3] = [
    ["lt", "lt", "*"],
    ["lt", "eq", "gt"],
    ["*", "gt", "gt"],
];
