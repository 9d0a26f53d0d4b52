"""Load a generated database into sqlite with declared foreign keys."""

from __future__ import annotations

import sqlite3

from ..errors import ConnectionFailed, TargetNotEmpty
from .dgp import FK_EDGES, TABLE_NAMES, GeneratedDatabase

_COLUMN_TYPES = {
    "brands": {"brand_id": "INTEGER PRIMARY KEY", "name": "TEXT", "country": "TEXT"},
    "categories": {
        "category_id": "INTEGER PRIMARY KEY",
        "name": "TEXT",
        "parent_id": "INTEGER",
    },
    "products": {
        "product_id": "INTEGER PRIMARY KEY",
        "name": "TEXT",
        "brand_id": "INTEGER",
        "category_id": "INTEGER",
        "price": "REAL",
        "created_days_ago": "INTEGER",
    },
    "skus": {
        "sku_id": "INTEGER PRIMARY KEY",
        "product_id": "INTEGER",
        "color": "TEXT",
        "size_label": "TEXT",
        "stock": "INTEGER",
    },
    "users": {
        "user_id": "INTEGER PRIMARY KEY",
        "name": "TEXT",
        "email": "TEXT",
        "country": "TEXT",
        "signup_days_ago": "INTEGER",
        "is_active": "INTEGER",
    },
    "addresses": {
        "address_id": "INTEGER PRIMARY KEY",
        "user_id": "INTEGER",
        "city": "TEXT",
        "street": "TEXT",
        "postal_code": "TEXT",
        "is_default": "INTEGER",
    },
    "sessions": {
        "session_id": "INTEGER PRIMARY KEY",
        "user_id": "INTEGER",
        "started_days_ago": "INTEGER",
        "duration_minutes": "REAL",
        "device": "TEXT",
    },
    "promotions": {
        "promotion_id": "INTEGER PRIMARY KEY",
        "name": "TEXT",
        "discount_pct": "REAL",
        "starts_days_ago": "INTEGER",
        "ends_days_ago": "INTEGER",
    },
    "coupons": {
        "coupon_id": "INTEGER PRIMARY KEY",
        "promotion_id": "INTEGER",
        "code": "TEXT",
        "discount_amount": "REAL",
    },
    "carts": {
        "cart_id": "INTEGER PRIMARY KEY",
        "user_id": "INTEGER",
        "created_days_ago": "INTEGER",
        "status": "TEXT",
    },
    "cart_items": {
        "cart_item_id": "INTEGER PRIMARY KEY",
        "cart_id": "INTEGER",
        "sku_id": "INTEGER",
        "quantity": "INTEGER",
    },
    "wishlists": {
        "wishlist_id": "INTEGER PRIMARY KEY",
        "user_id": "INTEGER",
        "product_id": "INTEGER",
        "added_days_ago": "INTEGER",
    },
    "orders": {
        "order_id": "INTEGER PRIMARY KEY",
        "user_id": "INTEGER",
        "order_days_ago": "INTEGER",
        "status": "TEXT",
    },
    "order_items": {
        "order_item_id": "INTEGER PRIMARY KEY",
        "order_id": "INTEGER",
        "sku_id": "INTEGER",
        "quantity": "INTEGER",
        "unit_price": "REAL",
    },
    "payments": {
        "payment_id": "INTEGER PRIMARY KEY",
        "order_id": "INTEGER",
        "paid_amount": "REAL",
        "method": "TEXT",
        "coupon_id": "INTEGER",
        "coupon_redeemed": "INTEGER",
    },
    "shipments": {
        "shipment_id": "INTEGER PRIMARY KEY",
        "order_id": "INTEGER",
        "carrier": "TEXT",
        "shipped_days_ago": "INTEGER",
        "delivered_days_ago": "INTEGER",
    },
    "point_transaction": {
        "txn_id": "INTEGER PRIMARY KEY",
        "user_id": "INTEGER",
        "change_amount": "INTEGER",
        "reason": "TEXT",
        "days_ago": "INTEGER",
    },
    "reviews": {
        "review_id": "INTEGER PRIMARY KEY",
        "order_id": "INTEGER",
        "user_id": "INTEGER",
        "product_id": "INTEGER",
        "review_score": "INTEGER",
        "review_text": "TEXT",
        "review_days_ago": "INTEGER",
    },
}


def create_table_sql(table: str) -> str:
    cols = [f'"{name}" {sql_type}' for name, sql_type in _COLUMN_TYPES[table].items()]
    fks = [
        f'FOREIGN KEY ("{from_col}") REFERENCES "{to_table}" ("{to_col}")'
        for from_table, from_col, to_table, to_col in FK_EDGES
        if from_table == table
    ]
    body = ",\n  ".join(cols + fks)
    return f'CREATE TABLE "{table}" (\n  {body}\n)'


def load_into(
    database: GeneratedDatabase, conn: sqlite3.Connection, force: bool = False
) -> None:
    try:
        existing = [
            row[0]
            for row in conn.execute(
                "SELECT name FROM sqlite_master WHERE type='table' "
                "AND name NOT LIKE 'sqlite_%'"
            )
        ]
        if existing and not force:
            raise TargetNotEmpty(
                f"target already holds tables: {', '.join(sorted(existing))}"
            )
        for table in existing:
            conn.execute(f'DROP TABLE "{table}"')
        for table in TABLE_NAMES:
            conn.execute(create_table_sql(table))
            data = database.tables[table]
            placeholders = ", ".join("?" * len(data.columns))
            conn.executemany(
                f'INSERT INTO "{table}" VALUES ({placeholders})', data.rows
            )
        conn.commit()
    except sqlite3.Error as exc:
        raise ConnectionFailed(str(exc)) from exc
