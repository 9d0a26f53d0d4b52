"""Synthetic e-commerce database generator.

Eighteen relational tables are drawn from seeded substreams; most fields are
plain random draws, but three variables are causally generated and form the
ground-truth mechanism used by the effect oracle:

  signup_days_ago -> is_active -> coupon_redeemed -> review_score
                      paid_amount ^            paid_amount ^

Every draw comes from a named substream of one root seed, so adding a table
never perturbs the draws of another.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import expit

from ..errors import InvalidConfig

TABLE_NAMES = (
    "brands",
    "categories",
    "products",
    "skus",
    "users",
    "addresses",
    "sessions",
    "promotions",
    "coupons",
    "carts",
    "cart_items",
    "wishlists",
    "orders",
    "order_items",
    "payments",
    "shipments",
    "point_transaction",
    "reviews",
)

BASE_SIZES = {
    "users": 200,
    "products": 60,
    "brands": 10,
    "skus": 150,
    "addresses": 260,
    "sessions": 500,
    "promotions": 8,
    "coupons": 40,
    "carts": 320,
    "wishlists": 260,
    "orders": 1000,
    "point_transaction": 450,
}

# category -> subcategories; products attach to subcategories only
CATEGORY_TREE = {
    "Electronics": ("Audio", "Cameras"),
    "Home": ("Kitchen", "Furniture"),
    "Sports": ("Fitness", "Outdoor"),
    "Beauty": ("Skincare", "Fragrance"),
    "Toys": ("Puzzles", "Games"),
}

PRODUCT_NOUNS = {
    "Audio": ("Headphones", "Speaker", "Earbuds", "Soundbar"),
    "Cameras": ("Camera", "Lens", "Tripod", "Gimbal"),
    "Kitchen": ("Blender", "Kettle", "Toaster", "Skillet"),
    "Furniture": ("Chair", "Desk", "Shelf", "Lamp"),
    "Fitness": ("Dumbbell", "Mat", "Kettlebell", "Band"),
    "Outdoor": ("Tent", "Backpack", "Lantern", "Stove"),
    "Skincare": ("Serum", "Cleanser", "Moisturizer", "Mask"),
    "Fragrance": ("Cologne", "Perfume", "Mist", "Candle"),
    "Puzzles": ("Puzzle", "Cube", "Maze", "Brainteaser"),
    "Games": ("Boardgame", "Cardgame", "Dice", "Token"),
}

ADJECTIVES = (
    "Compact", "Deluxe", "Eco", "Classic", "Pro", "Ultra", "Mini",
    "Prime", "Swift", "Sturdy", "Quiet", "Bright",
)
BRAND_PARTS_A = ("North", "Blue", "Iron", "Cedar", "Solar", "Rapid", "Vivid", "Stone")
BRAND_PARTS_B = ("peak", "forge", "leaf", "works", "line", "crest", "wave", "field")
FIRST_NAMES = (
    "alex", "bea", "carl", "dana", "eli", "fran", "gio", "hana",
    "ivan", "june", "kai", "lena", "marc", "nora", "omar", "pia",
)
LAST_NAMES = (
    "adams", "baker", "chen", "diaz", "evans", "fox", "gupta", "hall",
    "ito", "jones", "khan", "lopez", "mori", "nash", "ortiz", "park",
)
COUNTRIES = ("US", "DE", "JP", "BR", "IN", "FR", "KR", "CA")
CITIES = ("Springfield", "Riverton", "Lakewood", "Fairview", "Marston", "Delmar")
STREETS = ("Oak", "Maple", "Cedar", "Birch", "Elm", "Pine")
DEVICES = ("mobile", "desktop", "tablet")
PAY_METHODS = ("card", "paypal", "points", "bank")
CARRIERS = ("ups", "fedex", "dhl", "postal")
CART_STATUSES = ("open", "converted", "abandoned")
ORDER_STATUSES = ("delivered", "shipped", "returned")
COLORS = ("black", "white", "red", "blue", "green", "gray")
SIZE_LABELS = ("S", "M", "L", "one-size")
LOREM = (
    "solid", "value", "arrived", "quickly", "works", "as", "expected",
    "great", "build", "quality", "would", "buy", "again", "packaging",
    "was", "fine", "color", "matches", "photo", "easy", "to", "use",
    "setup", "took", "minutes", "happy", "with", "it", "overall", "decent",
)

# variables with a causal mechanism; anything else has no ground-truth effect
CAUSAL_TREATMENTS = ("is_active", "coupon_redeemed")
CAUSAL_OUTCOME = "review_score"


@dataclass(frozen=True)
class DgpConfig:
    """All generation knobs. Every number here is configuration, not code."""

    seed: int = 0
    scale: Mapping[str, float] = field(default_factory=dict)
    price_range: tuple[float, float] = (5.0, 500.0)
    activity_midpoint_days: float = 180.0
    activity_scale_days: float = 60.0
    review_coefficients: Mapping[str, float] = field(
        default_factory=lambda: {
            "is_active": 0.8,
            "coupon_redeemed": 0.5,
            "paid_amount": 0.002,
        }
    )
    review_intercept: float = -1.0
    score_cutpoints: tuple[float, ...] = (-1.5, -0.5, 0.5, 1.5)
    # latent reviews below this threshold never materialize as rows
    existence_threshold: float = -6.0
    latent_noise_sd: float = 0.08
    signup_days_range: tuple[int, int] = (0, 720)
    coupon_intercept: float = -0.5
    coupon_is_active_coef: float = 0.8
    coupon_paid_coef: float = 0.0015
    # replaces the coupon mechanism with a fair coin (randomized treatment)
    randomized_coupon: bool = False

    def __post_init__(self):
        lo, hi = self.price_range
        if not lo < hi:
            raise InvalidConfig("price_range must satisfy low < high")
        for name, mult in self.scale.items():
            if name not in BASE_SIZES:
                raise InvalidConfig(f"unknown scale entity {name!r}")
            if mult < 1:
                raise InvalidConfig(f"scale multiplier for {name!r} must be >= 1")
        cuts = self.score_cutpoints
        if len(cuts) != 4 or any(a >= b for a, b in zip(cuts, cuts[1:])):
            raise InvalidConfig("score_cutpoints must be 4 strictly ascending reals")
        if self.latent_noise_sd < 0:
            raise InvalidConfig("latent_noise_sd must be >= 0")
        if self.activity_scale_days <= 0:
            raise InvalidConfig("activity_scale_days must be positive")
        s_lo, s_hi = self.signup_days_range
        if s_lo < 0 or s_lo > s_hi:
            raise InvalidConfig("signup_days_range must be 0 <= low <= high")
        unknown = set(self.review_coefficients) - {
            "is_active",
            "coupon_redeemed",
            "paid_amount",
        }
        if unknown:
            raise InvalidConfig(f"unknown review coefficient parents: {sorted(unknown)}")

    def size(self, entity: str) -> int:
        return int(round(BASE_SIZES[entity] * self.scale.get(entity, 1)))


@dataclass
class Mechanisms:
    """Exogenous noise and causal variables kept for counterfactual replay."""

    signup_days: np.ndarray  # per user
    u_active: np.ndarray  # per user, uniform noise behind is_active
    is_active: np.ndarray  # per user, 0/1
    order_user: np.ndarray  # per order, 0-based user index
    paid_amount: np.ndarray  # per order, rounded as stored
    u_coupon: np.ndarray  # per order, uniform noise behind coupon_redeemed
    coupon_redeemed: np.ndarray  # per order, 0/1
    eps_review: np.ndarray  # per order, latent noise
    latent: np.ndarray  # per order, factual latent score
    review_exists: np.ndarray  # per order, bool
    review_score: np.ndarray  # per order, 1..5 (defined even when not materialized)


@dataclass
class TableData:
    columns: tuple[str, ...]
    rows: list


@dataclass
class GeneratedDatabase:
    tables: dict[str, TableData]
    fk_edges: list[tuple[str, str, str, str]]
    seed: int
    config: DgpConfig
    mechanisms: Mechanisms


def _stream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def activity_probability(config: DgpConfig, signup_days: np.ndarray) -> np.ndarray:
    return expit(
        -(np.asarray(signup_days, dtype=float) - config.activity_midpoint_days)
        / config.activity_scale_days
    )


def coupon_probability(
    config: DgpConfig, is_active: np.ndarray, paid_amount: np.ndarray
) -> np.ndarray:
    if config.randomized_coupon:
        return np.full(len(paid_amount), 0.5)
    return expit(
        config.coupon_intercept
        + config.coupon_is_active_coef * np.asarray(is_active, dtype=float)
        + config.coupon_paid_coef * np.asarray(paid_amount, dtype=float)
    )


def review_latent(
    config: DgpConfig,
    is_active: np.ndarray,
    coupon_redeemed: np.ndarray,
    paid_amount: np.ndarray,
    eps: np.ndarray,
) -> np.ndarray:
    coef = config.review_coefficients
    return (
        config.review_intercept
        + coef.get("is_active", 0.0) * np.asarray(is_active, dtype=float)
        + coef.get("coupon_redeemed", 0.0) * np.asarray(coupon_redeemed, dtype=float)
        + coef.get("paid_amount", 0.0) * np.asarray(paid_amount, dtype=float)
        + eps
    )


def score_from_latent(config: DgpConfig, latent: np.ndarray) -> np.ndarray:
    cuts = np.asarray(config.score_cutpoints)
    return 1 + np.searchsorted(cuts, latent, side="right")


def replay_reviews(
    config: DgpConfig,
    mech: Mechanisms,
    treatment: str,
    forced: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Recompute (review_exists, review_score) per order with `treatment`
    forced, reusing the stored exogenous noise. Forcing the factual values
    reproduces the factual outputs exactly."""
    forced = np.asarray(forced)
    if treatment == "coupon_redeemed":
        active_per_order = mech.is_active[mech.order_user]
        redeemed = forced
    elif treatment == "is_active":
        active_per_order = forced
        p = coupon_probability(config, active_per_order, mech.paid_amount)
        redeemed = (mech.u_coupon < p).astype(np.int64)
    else:
        raise ValueError(f"no replay mechanism for {treatment!r}")
    latent = review_latent(
        config, active_per_order, redeemed, mech.paid_amount, mech.eps_review
    )
    return latent >= config.existence_threshold, score_from_latent(config, latent)


def _lorem(rng: np.random.Generator, n_rows: int, words_per_row: int) -> list[str]:
    picks = rng.integers(0, len(LOREM), size=(n_rows, words_per_row))
    return [" ".join(LOREM[j] for j in row) for row in picks]


def generate(config: DgpConfig) -> GeneratedDatabase:
    """Draw all 18 tables deterministically from (seed, config)."""
    seed = config.seed
    tables: dict[str, TableData] = {}

    # brands ------------------------------------------------------------------
    n_brands = config.size("brands")
    rng = _stream(seed, "brands")
    part_a = rng.integers(0, len(BRAND_PARTS_A), n_brands)
    part_b = rng.integers(0, len(BRAND_PARTS_B), n_brands)
    brand_country = rng.integers(0, len(COUNTRIES), n_brands)
    tables["brands"] = TableData(
        ("brand_id", "name", "country"),
        [
            (i + 1, BRAND_PARTS_A[part_a[i]] + BRAND_PARTS_B[part_b[i]], COUNTRIES[brand_country[i]])
            for i in range(n_brands)
        ],
    )

    # categories (fixed two-level hierarchy) -----------------------------------
    cat_rows = []
    sub_ids = []
    next_id = 1
    for top, subs in CATEGORY_TREE.items():
        top_id = next_id
        cat_rows.append((top_id, top, None))
        next_id += 1
        for sub in subs:
            cat_rows.append((next_id, sub, top_id))
            sub_ids.append((next_id, sub))
            next_id += 1
    tables["categories"] = TableData(("category_id", "name", "parent_id"), cat_rows)

    # products ------------------------------------------------------------------
    n_products = config.size("products")
    rng = _stream(seed, "products")
    sub_pick = rng.integers(0, len(sub_ids), n_products)
    adj_pick = rng.integers(0, len(ADJECTIVES), n_products)
    noun_pick = rng.integers(0, 4, n_products)
    brand_pick = rng.integers(1, n_brands + 1, n_products)
    lo, hi = config.price_range
    price = np.round(rng.uniform(lo, hi, n_products), 2)
    created = rng.integers(0, 721, n_products)
    product_rows = []
    for i in range(n_products):
        cat_id, cat_name = sub_ids[sub_pick[i]]
        name = f"{ADJECTIVES[adj_pick[i]]} {PRODUCT_NOUNS[cat_name][noun_pick[i]]}"
        product_rows.append(
            (i + 1, name, int(brand_pick[i]), cat_id, float(price[i]), int(created[i]))
        )
    tables["products"] = TableData(
        ("product_id", "name", "brand_id", "category_id", "price", "created_days_ago"),
        product_rows,
    )

    # skus ------------------------------------------------------------------
    n_skus = config.size("skus")
    rng = _stream(seed, "skus")
    sku_product = rng.integers(0, n_products, n_skus)
    sku_color = rng.integers(0, len(COLORS), n_skus)
    sku_size = rng.integers(0, len(SIZE_LABELS), n_skus)
    stock = rng.integers(0, 501, n_skus)
    tables["skus"] = TableData(
        ("sku_id", "product_id", "color", "size_label", "stock"),
        [
            (i + 1, int(sku_product[i]) + 1, COLORS[sku_color[i]], SIZE_LABELS[sku_size[i]], int(stock[i]))
            for i in range(n_skus)
        ],
    )

    # users (causal: is_active) ----------------------------------------------
    n_users = config.size("users")
    rng = _stream(seed, "users")
    s_lo, s_hi = config.signup_days_range
    signup_days = rng.integers(s_lo, s_hi + 1, n_users)
    u_active = rng.random(n_users)
    is_active = (u_active < activity_probability(config, signup_days)).astype(np.int64)
    first = rng.integers(0, len(FIRST_NAMES), n_users)
    last = rng.integers(0, len(LAST_NAMES), n_users)
    user_country = rng.integers(0, len(COUNTRIES), n_users)
    user_rows = []
    for i in range(n_users):
        uname = f"{FIRST_NAMES[first[i]]} {LAST_NAMES[last[i]]}"
        email = f"{FIRST_NAMES[first[i]]}.{LAST_NAMES[last[i]]}.{i + 1}@example.com"
        user_rows.append(
            (i + 1, uname, email, COUNTRIES[user_country[i]], int(signup_days[i]), int(is_active[i]))
        )
    tables["users"] = TableData(
        ("user_id", "name", "email", "country", "signup_days_ago", "is_active"),
        user_rows,
    )

    # addresses ------------------------------------------------------------------
    n_addr = config.size("addresses")
    rng = _stream(seed, "addresses")
    addr_user = rng.integers(1, n_users + 1, n_addr)
    city = rng.integers(0, len(CITIES), n_addr)
    street_no = rng.integers(1, 900, n_addr)
    street = rng.integers(0, len(STREETS), n_addr)
    postal = rng.integers(10000, 99999, n_addr)
    default_flag = (rng.random(n_addr) < 0.5).astype(np.int64)
    tables["addresses"] = TableData(
        ("address_id", "user_id", "city", "street", "postal_code", "is_default"),
        [
            (
                i + 1,
                int(addr_user[i]),
                CITIES[city[i]],
                f"{int(street_no[i])} {STREETS[street[i]]} St",
                str(int(postal[i])),
                int(default_flag[i]),
            )
            for i in range(n_addr)
        ],
    )

    # sessions ------------------------------------------------------------------
    n_sessions = config.size("sessions")
    rng = _stream(seed, "sessions")
    sess_user = rng.integers(0, n_users, n_sessions)
    started = rng.integers(0, signup_days[sess_user] + 1)
    duration = np.round(rng.uniform(1, 120, n_sessions), 1)
    device = rng.integers(0, len(DEVICES), n_sessions)
    tables["sessions"] = TableData(
        ("session_id", "user_id", "started_days_ago", "duration_minutes", "device"),
        [
            (i + 1, int(sess_user[i]) + 1, int(started[i]), float(duration[i]), DEVICES[device[i]])
            for i in range(n_sessions)
        ],
    )

    # promotions ------------------------------------------------------------------
    n_promos = config.size("promotions")
    rng = _stream(seed, "promotions")
    promo_adj = rng.integers(0, len(ADJECTIVES), n_promos)
    pct = np.round(rng.uniform(5, 50, n_promos), 1)
    starts = rng.integers(30, 400, n_promos)
    dur = rng.integers(7, 60, n_promos)
    tables["promotions"] = TableData(
        ("promotion_id", "name", "discount_pct", "starts_days_ago", "ends_days_ago"),
        [
            (
                i + 1,
                f"{ADJECTIVES[promo_adj[i]]} Sale {i + 1}",
                float(pct[i]),
                int(starts[i]),
                int(max(starts[i] - dur[i], 0)),
            )
            for i in range(n_promos)
        ],
    )

    # coupons ------------------------------------------------------------------
    n_coupons = config.size("coupons")
    rng = _stream(seed, "coupons")
    coupon_promo = rng.integers(1, n_promos + 1, n_coupons)
    code_num = rng.integers(10000, 99999, n_coupons)
    amount = np.round(rng.uniform(1, 50, n_coupons), 2)
    tables["coupons"] = TableData(
        ("coupon_id", "promotion_id", "code", "discount_amount"),
        [
            (i + 1, int(coupon_promo[i]), f"CPN-{int(code_num[i])}", float(amount[i]))
            for i in range(n_coupons)
        ],
    )

    # carts ------------------------------------------------------------------
    n_carts = config.size("carts")
    rng = _stream(seed, "carts")
    cart_user = rng.integers(0, n_users, n_carts)
    cart_created = rng.integers(0, signup_days[cart_user] + 1)
    cart_status = rng.integers(0, len(CART_STATUSES), n_carts)
    tables["carts"] = TableData(
        ("cart_id", "user_id", "created_days_ago", "status"),
        [
            (i + 1, int(cart_user[i]) + 1, int(cart_created[i]), CART_STATUSES[cart_status[i]])
            for i in range(n_carts)
        ],
    )

    # cart_items ------------------------------------------------------------------
    rng = _stream(seed, "cart_items")
    items_per_cart = rng.integers(1, 4, n_carts)
    cart_ids = np.repeat(np.arange(1, n_carts + 1), items_per_cart)
    n_cart_items = len(cart_ids)
    ci_sku = rng.integers(1, n_skus + 1, n_cart_items)
    ci_qty = rng.integers(1, 4, n_cart_items)
    tables["cart_items"] = TableData(
        ("cart_item_id", "cart_id", "sku_id", "quantity"),
        [
            (i + 1, int(cart_ids[i]), int(ci_sku[i]), int(ci_qty[i]))
            for i in range(n_cart_items)
        ],
    )

    # wishlists ------------------------------------------------------------------
    n_wish = config.size("wishlists")
    rng = _stream(seed, "wishlists")
    wish_user = rng.integers(1, n_users + 1, n_wish)
    wish_product = rng.integers(1, n_products + 1, n_wish)
    wish_days = rng.integers(0, 721, n_wish)
    tables["wishlists"] = TableData(
        ("wishlist_id", "user_id", "product_id", "added_days_ago"),
        [
            (i + 1, int(wish_user[i]), int(wish_product[i]), int(wish_days[i]))
            for i in range(n_wish)
        ],
    )

    # orders ------------------------------------------------------------------
    n_orders = config.size("orders")
    rng = _stream(seed, "orders")
    order_user = rng.integers(0, n_users, n_orders)
    order_days = rng.integers(0, signup_days[order_user] + 1)
    order_status = rng.choice(len(ORDER_STATUSES), n_orders, p=[0.7, 0.2, 0.1])
    tables["orders"] = TableData(
        ("order_id", "user_id", "order_days_ago", "status"),
        [
            (i + 1, int(order_user[i]) + 1, int(order_days[i]), ORDER_STATUSES[order_status[i]])
            for i in range(n_orders)
        ],
    )

    # order_items; paid_amount is the item total and feeds two mechanisms -----
    rng = _stream(seed, "order_items")
    items_per_order = 1 + (rng.random(n_orders) < 0.25).astype(np.int64)
    oi_order = np.repeat(np.arange(n_orders), items_per_order)
    n_order_items = len(oi_order)
    oi_sku = rng.integers(0, n_skus, n_order_items)
    oi_qty = 1 + (rng.random(n_order_items) < 0.2).astype(np.int64)
    price_by_sku = price[sku_product]
    oi_price = price_by_sku[oi_sku]
    tables["order_items"] = TableData(
        ("order_item_id", "order_id", "sku_id", "quantity", "unit_price"),
        [
            (i + 1, int(oi_order[i]) + 1, int(oi_sku[i]) + 1, int(oi_qty[i]), float(oi_price[i]))
            for i in range(n_order_items)
        ],
    )
    paid_amount = np.round(
        np.bincount(oi_order, weights=oi_qty * oi_price, minlength=n_orders), 2
    )

    # payments (causal: coupon_redeemed) ---------------------------------------
    rng = _stream(seed, "payments")
    u_coupon = rng.random(n_orders)
    p_coupon = coupon_probability(config, is_active[order_user], paid_amount)
    coupon_redeemed = (u_coupon < p_coupon).astype(np.int64)
    pay_method = rng.integers(0, len(PAY_METHODS), n_orders)
    coupon_pick = rng.integers(1, n_coupons + 1, n_orders)
    tables["payments"] = TableData(
        ("payment_id", "order_id", "paid_amount", "method", "coupon_id", "coupon_redeemed"),
        [
            (
                i + 1,
                i + 1,
                float(paid_amount[i]),
                PAY_METHODS[pay_method[i]],
                int(coupon_pick[i]) if coupon_redeemed[i] else None,
                int(coupon_redeemed[i]),
            )
            for i in range(n_orders)
        ],
    )

    # shipments ------------------------------------------------------------------
    rng = _stream(seed, "shipments")
    carrier = rng.integers(0, len(CARRIERS), n_orders)
    ship_lag = rng.integers(0, 4, n_orders)
    deliver_lag = rng.integers(1, 8, n_orders)
    shipment_rows = []
    for i in range(n_orders):
        shipped = max(int(order_days[i]) - int(ship_lag[i]), 0)
        delivered = (
            max(shipped - int(deliver_lag[i]), 0)
            if ORDER_STATUSES[order_status[i]] == "delivered"
            else None
        )
        shipment_rows.append((i + 1, i + 1, CARRIERS[carrier[i]], shipped, delivered))
    tables["shipments"] = TableData(
        ("shipment_id", "order_id", "carrier", "shipped_days_ago", "delivered_days_ago"),
        shipment_rows,
    )

    # point_transaction ----------------------------------------------------------
    n_txn = config.size("point_transaction")
    rng = _stream(seed, "point_transaction")
    txn_user = rng.integers(1, n_users + 1, n_txn)
    change = rng.integers(-500, 501, n_txn)
    change[change == 0] = 10
    txn_days = rng.integers(0, 721, n_txn)
    txn_reason_pick = rng.integers(0, 2, n_txn)
    txn_rows = []
    for i in range(n_txn):
        reason = "earn" if change[i] > 0 else ("redeem", "expire")[txn_reason_pick[i]]
        txn_rows.append((i + 1, int(txn_user[i]), int(change[i]), reason, int(txn_days[i])))
    tables["point_transaction"] = TableData(
        ("txn_id", "user_id", "change_amount", "reason", "days_ago"),
        txn_rows,
    )

    # reviews (causal: review_score from the latent cutpoint model) -----------
    rng = _stream(seed, "reviews")
    eps_review = rng.normal(0.0, config.latent_noise_sd, n_orders)
    latent = review_latent(
        config, is_active[order_user], coupon_redeemed, paid_amount, eps_review
    )
    review_exists = latent >= config.existence_threshold
    review_score = score_from_latent(config, latent)
    review_days = rng.integers(0, order_days + 1)
    review_text = _lorem(rng, n_orders, 6)
    first_item_of_order = np.searchsorted(oi_order, np.arange(n_orders))
    review_product = sku_product[oi_sku[first_item_of_order]] + 1
    review_rows = []
    rid = 0
    for i in range(n_orders):
        if not review_exists[i]:
            continue
        rid += 1
        review_rows.append(
            (
                rid,
                i + 1,
                int(order_user[i]) + 1,
                int(review_product[i]),
                int(review_score[i]),
                review_text[i],
                int(review_days[i]),
            )
        )
    tables["reviews"] = TableData(
        (
            "review_id",
            "order_id",
            "user_id",
            "product_id",
            "review_score",
            "review_text",
            "review_days_ago",
        ),
        review_rows,
    )

    mechanisms = Mechanisms(
        signup_days=signup_days,
        u_active=u_active,
        is_active=is_active,
        order_user=order_user,
        paid_amount=paid_amount,
        u_coupon=u_coupon,
        coupon_redeemed=coupon_redeemed,
        eps_review=eps_review,
        latent=latent,
        review_exists=review_exists,
        review_score=review_score,
    )
    ordered = {name: tables[name] for name in TABLE_NAMES}
    return GeneratedDatabase(
        tables=ordered,
        fk_edges=list(FK_EDGES),
        seed=seed,
        config=config,
        mechanisms=mechanisms,
    )


FK_EDGES = (
    ("categories", "parent_id", "categories", "category_id"),
    ("products", "brand_id", "brands", "brand_id"),
    ("products", "category_id", "categories", "category_id"),
    ("skus", "product_id", "products", "product_id"),
    ("addresses", "user_id", "users", "user_id"),
    ("sessions", "user_id", "users", "user_id"),
    ("coupons", "promotion_id", "promotions", "promotion_id"),
    ("carts", "user_id", "users", "user_id"),
    ("cart_items", "cart_id", "carts", "cart_id"),
    ("cart_items", "sku_id", "skus", "sku_id"),
    ("wishlists", "user_id", "users", "user_id"),
    ("wishlists", "product_id", "products", "product_id"),
    ("orders", "user_id", "users", "user_id"),
    ("order_items", "order_id", "orders", "order_id"),
    ("order_items", "sku_id", "skus", "sku_id"),
    ("payments", "order_id", "orders", "order_id"),
    ("payments", "coupon_id", "coupons", "coupon_id"),
    ("shipments", "order_id", "orders", "order_id"),
    ("point_transaction", "user_id", "users", "user_id"),
    ("reviews", "order_id", "orders", "order_id"),
    ("reviews", "user_id", "users", "user_id"),
    ("reviews", "product_id", "products", "product_id"),
)
