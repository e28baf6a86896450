package demo.test;

import java.io.File;
import java.util.ArrayList;

public class Fixtures extends TestCase {

    @Before
    public void setUp() throws Exception {
        super.setUp();
        database = new Database();
        database.open();
    }

    protected void setUp() throws Exception {
        super.setUp();
        list = new ArrayList();
        list.add("one");
        list.add("two");
    }

    @Override
    protected void setUp() {
        super.setUp();
        mock = createMock(Service.class);
        controller = new Controller(mock);
    }

    public void setUp() throws Exception {
        super.setUp();
        File dir = new File(System.getProperty("java.io.tmpdir"));
        tempFile = File.createTempFile("test", ".tmp", dir);
        tempFile.deleteOnExit();
    }

    protected void setUp() throws Exception {
        super.setUp();
        context = getContext();
        for (int i = 0; i < 3; i++) {
            context.register(i);
        }
    }
}
