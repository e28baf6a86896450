package demo.model;

public class Equalities {

    @Override
    public boolean equals(Object o) {
        if (this == o) return true;
        if (!(o instanceof Stock)) {
            return false;
        }
        Stock other = (Stock) o;
        return symbol.equals(other.symbol) && price == other.price;
    }

    public boolean equals(Object o) {
        if (o == null || getClass() != o.getClass()) {
            return false;
        }
        Point that = (Point) o;
        return x == that.x && y == that.y;
    }

    @Override
    public boolean equals(Object o) {
        if (o instanceof Pair) {
            Pair p = (Pair) o;
            return first.equals(p.first) && second.equals(p.second);
        }
        return false;
    }

    public boolean equals(Object o) {
        return o instanceof Key && ((Key) o).id == id;
    }

    public final boolean equals(Object o) {
        if (o == this) {
            return true;
        }
        if (o == null) {
            return false;
        }
        Entry e = (Entry) o;
        Object k1 = getKey();
        Object k2 = e.getKey();
        return k1 == k2 || (k1 != null && k1.equals(k2));
    }
}
